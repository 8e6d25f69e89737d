//! `offload`: runs the four placement scenarios over randomized repetitions
//! and writes one CSV row per (sweep point, repetition, scenario).

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use offload_core::harness::{self, Deadline, InstanceSource, RttSweep, Sweep};
use offload_core::profile::load_instance;
use offload_core::{Instance, OmegaForm, RunSpec, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct SynthShape {
    m: usize,
    k: usize,
}

impl FromStr for SynthShape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (m, k) = s.split_once(',').ok_or_else(|| format!("expected M,K, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
        Ok(Self {
            m: parse(m)?,
            k: parse(k)?,
        })
    }
}

/// `RADIO:MIN:MAX:STEPS`, radio by index or name, RTT in seconds.
#[derive(Debug, Clone, PartialEq)]
struct RttArg {
    radio: String,
    sweep: Sweep,
}

impl FromStr for RttArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (radio, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("expected RADIO:MIN:MAX:STEPS, got {s:?}"))?;
        let sweep = rest.parse::<Sweep>().map_err(|e| e.to_string())?;
        Ok(Self {
            radio: radio.trim().to_string(),
            sweep,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "offload", version, about = "Energy-aware multi-radio offloading experiments")]
struct Args {
    /// Instance JSON; the bundled 14-component profile when neither this nor --synth is given.
    #[arg(long, value_name = "PATH", conflicts_with = "synth")]
    instance: Option<PathBuf>,

    /// Fresh random applications with M components and K radios per repetition.
    #[arg(long, value_name = "M,K")]
    synth: Option<SynthShape>,

    /// Use the instance exactly as given instead of redrawing unmeasured data per repetition.
    #[arg(long, conflicts_with = "synth")]
    no_resample: bool,

    /// Comma-separated subset of local, remote, exhaustive, iterative.
    #[arg(
        long,
        value_name = "LIST",
        value_delimiter = ',',
        default_value = "local,remote,exhaustive,iterative"
    )]
    scenarios: Vec<Scenario>,

    /// Fixed deadline in seconds; defaults to the instance's own.
    #[arg(long, value_name = "SECONDS", conflicts_with = "t_req_sweep")]
    t_req: Option<f64>,

    /// Deadline sweep in seconds, endpoints included.
    #[arg(long, value_name = "MIN:MAX:STEPS")]
    t_req_sweep: Option<Sweep>,

    /// RTT sweep on one radio, in seconds.
    #[arg(long, value_name = "RADIO:MIN:MAX:STEPS")]
    rtt_sweep: Option<RttArg>,

    /// Add half the radio RTT to every transfer; on by default when sweeping RTT.
    #[arg(long, value_enum)]
    rtt_model: Option<Toggle>,

    #[arg(long, value_name = "N", default_value_t = 100)]
    reps: usize,

    #[arg(long, value_name = "N", default_value_t = 0)]
    seed: u64,

    /// Output CSV path.
    #[arg(long, value_name = "PATH", default_value = "results.csv")]
    out: PathBuf,

    /// Use the split formula with the allocation multiplier outside the radio sum.
    #[arg(long)]
    phi_outside_sum: bool,
}

fn resolve_radio(name: &str, base: Option<&Instance>) -> Result<usize> {
    if let Ok(k) = name.parse::<usize>() {
        return Ok(k);
    }
    let Some(inst) = base else {
        bail!("radio {name:?} must be given by index for synthetic instances");
    };
    inst.radios()
        .iter()
        .position(|r| r.name.eq_ignore_ascii_case(name))
        .with_context(|| {
            let known: Vec<&str> = inst.radios().iter().map(|r| r.name.as_str()).collect();
            format!("no radio named {name:?} (have {})", known.join(", "))
        })
}

fn build_spec(args: &Args) -> Result<RunSpec> {
    let base = match (&args.instance, args.synth) {
        (Some(path), _) => Some(load_instance(path).with_context(|| format!("loading instance {}", path.display()))?),
        (None, None) => Some(Instance::profile14()),
        (None, Some(_)) => None,
    };
    let radios = base.as_ref().map(|b| b.k()).or(args.synth.map(|s| s.k)).unwrap_or(0);

    let rtt_sweep = match &args.rtt_sweep {
        Some(arg) => {
            let radio = resolve_radio(&arg.radio, base.as_ref())?;
            if radio >= radios {
                bail!("radio index {radio} out of range, the instance has {radios} radios");
            }
            Some(RttSweep {
                radio,
                sweep: arg.sweep,
            })
        }
        None => None,
    };

    let source = match (base, args.synth) {
        (Some(inst), _) if args.no_resample => InstanceSource::Fixed(inst),
        (Some(inst), _) => InstanceSource::Resample(inst),
        (None, Some(SynthShape { m, k })) => InstanceSource::Synthetic { m, k },
        (None, None) => unreachable!("a base instance is loaded when --synth is absent"),
    };
    let mut spec = RunSpec::new(source);
    spec.scenarios = args.scenarios.clone();
    spec.deadline = match (args.t_req, &args.t_req_sweep) {
        (Some(t), _) => Deadline::Fixed(t),
        (None, Some(s)) => Deadline::Sweep(*s),
        (None, None) => Deadline::Instance,
    };
    spec.rtt_model = match args.rtt_model {
        Some(t) => t == Toggle::On,
        None => rtt_sweep.is_some(),
    };
    spec.rtt_sweep = rtt_sweep;
    spec.reps = args.reps;
    spec.seed = args.seed;
    if args.phi_outside_sum {
        spec.solver.omega_form = OmegaForm::PhiOutsideSum;
    }
    spec.validate().context("invalid run")?;
    Ok(spec)
}

fn main() -> Result<()> {
    let args = Args::parse();
    let spec = build_spec(&args)?;
    let rows = harness::run(&spec).context("running experiments")?;
    harness::save_csv(&rows, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    print!("{}", harness::summarize(&rows));
    println!("{} rows written to {}", rows.len(), args.out.display());
    Ok(())
}
