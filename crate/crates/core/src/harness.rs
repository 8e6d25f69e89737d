//! Repeated scenario runs over deadline and RTT sweeps, with CSV output.
//!
//! A run evaluates the four planners (all-local, all-remote, exhaustive and
//! iterative) on `reps` random instances at every sweep point and emits one
//! [`ResultRow`] per (sweep point, repetition, scenario).

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::plan_costs;
use crate::error::{Error, Result};
use crate::exact::{baseline_local, baseline_remote, exhaustive_solve, ExactConfig};
use crate::iterative::{solve, IterativeConfig};
use crate::profile::{resample_instance, synthesize_instance, ParamRanges};
use crate::profile::{uploads, validate_plan, Instance, OffloadPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Local,
    Remote,
    Exhaustive,
    Iterative,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Local,
        Scenario::Remote,
        Scenario::Exhaustive,
        Scenario::Iterative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Local => "local",
            Scenario::Remote => "remote",
            Scenario::Exhaustive => "exhaustive",
            Scenario::Iterative => "iterative",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s.trim())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown scenario {s:?} (expected local, remote, exhaustive or iterative)"
                ))
            })
    }
}

/// `steps` evenly spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        let sweep = Self { min, max, steps };
        sweep.validate()?;
        Ok(sweep)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(Error::Config(format!(
                "sweep bounds {}..{} are not ordered",
                self.min, self.max
            )));
        }
        if self.steps == 0 {
            return Err(Error::Config("a sweep needs at least one point".into()));
        }
        if self.steps == 1 && self.min != self.max {
            return Err(Error::Config("a one-point sweep needs min == max".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|n| {
                if n + 1 == self.steps {
                    self.max
                } else {
                    self.min + step * n as f64
                }
            })
            .collect()
    }
}

/// Parses `MIN:MAX:STEPS`.
impl FromStr for Sweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("expected MIN:MAX:STEPS, got {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, steps] = parts.as_slice() else {
            return Err(bad());
        };
        Sweep::new(
            min.trim().parse().map_err(|_| bad())?,
            max.trim().parse().map_err(|_| bad())?,
            steps.trim().parse().map_err(|_| bad())?,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RttSweep {
    pub radio: usize,
    /// RTT values in seconds.
    pub sweep: Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Deadline {
    /// Keep each instance's own deadline.
    Instance,
    Fixed(f64),
    Sweep(Sweep),
}

/// Where the per-repetition instances come from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    /// Redraw the unmeasured quantities of a base instance for every repetition.
    Resample(Instance),
    /// Use the instance as given in every repetition.
    Fixed(Instance),
    /// Fresh random applications with `m` components and `k` radios.
    Synthetic { m: usize, k: usize },
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub source: InstanceSource,
    pub ranges: ParamRanges,
    pub scenarios: Vec<Scenario>,
    pub deadline: Deadline,
    pub rtt_sweep: Option<RttSweep>,
    pub rtt_model: bool,
    pub reps: usize,
    pub seed: u64,
    pub solver: IterativeConfig,
}

impl RunSpec {
    pub fn new(source: InstanceSource) -> Self {
        Self {
            source,
            ranges: ParamRanges::default(),
            scenarios: Scenario::ALL.to_vec(),
            deadline: Deadline::Instance,
            rtt_sweep: None,
            rtt_model: false,
            reps: 100,
            seed: 0,
            solver: IterativeConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.scenarios.is_empty() {
            return Err(Error::Config("no scenarios selected".into()));
        }
        match &self.deadline {
            Deadline::Fixed(t) if t.is_nan() || *t <= 0.0 => {
                return Err(Error::Config(format!("deadline must be positive, got {t}")));
            }
            Deadline::Sweep(s) => {
                s.validate()?;
                if s.min <= 0.0 {
                    return Err(Error::Config("deadline sweep must stay positive".into()));
                }
            }
            _ => {}
        }
        if let Some(rtt) = &self.rtt_sweep {
            rtt.sweep.validate()?;
            if rtt.sweep.min < 0.0 {
                return Err(Error::Config("rtt sweep must be non-negative".into()));
            }
            if !self.rtt_model {
                return Err(Error::Config(
                    "an rtt sweep has no effect with the rtt model off".into(),
                ));
            }
        }
        self.ranges.validate()?;
        self.solver.validate()
    }

    fn instance(&self, seed: u64) -> Result<Instance> {
        let inst = match &self.source {
            InstanceSource::Resample(base) => resample_instance(base, seed, &self.ranges)?,
            InstanceSource::Fixed(base) => base.clone(),
            InstanceSource::Synthetic { m, k } => synthesize_instance(*m, *k, seed, &self.ranges)?,
        };
        Ok(inst.with_rtt_model(self.rtt_model))
    }

    fn points(&self) -> Vec<Point> {
        let deadlines: Vec<Option<f64>> = match &self.deadline {
            Deadline::Instance => vec![None],
            Deadline::Fixed(t) => vec![Some(*t)],
            Deadline::Sweep(s) => s.values().into_iter().map(Some).collect(),
        };
        let rtts: Vec<Option<(usize, f64)>> = match &self.rtt_sweep {
            None => vec![None],
            Some(r) => r.sweep.values().into_iter().map(|v| Some((r.radio, v))).collect(),
        };
        deadlines
            .iter()
            .flat_map(|&t_req| rtts.iter().map(move |&rtt| Point { t_req, rtt }))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    t_req: Option<f64>,
    rtt: Option<(usize, f64)>,
}

impl Point {
    fn apply(&self, inst: Instance) -> Result<Instance> {
        let inst = match self.t_req {
            Some(t) => inst.with_t_req(t)?,
            None => inst,
        };
        match self.rtt {
            Some((k, rtt)) => inst.with_radio_rtt(k, rtt),
            None => Ok(inst),
        }
    }
}

/// One planner outcome on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: Scenario,
    /// Index into the sweep grid (deadline-major, then RTT).
    pub sweep_index: usize,
    /// Seed the repetition's instance was drawn with.
    pub seed: u64,
    pub t_req: f64,
    /// Per-radio RTT, s.
    pub rtt: Vec<f64>,
    /// `None` when the planner found no feasible plan to report.
    pub energy_j: Option<f64>,
    /// Energy over the all-local energy of the same instance.
    pub normalized_energy: Option<f64>,
    pub time_s: Option<f64>,
    pub feasible: bool,
    /// Data-weighted fraction of uploaded bits sent on radio 0; `None` without uploads.
    pub wifi_share: Option<f64>,
    /// Outer iterations (iterative) or placements evaluated (exhaustive).
    pub iterations: u64,
    pub inner_iterations: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    scenario: Scenario,
    sweep_index: usize,
    seed: u64,
    t_req: f64,
    rtt_s: String,
    energy_j: Option<f64>,
    normalized_energy: Option<f64>,
    time_s: Option<f64>,
    feasible: bool,
    wifi_share: Option<f64>,
    iterations: u64,
    inner_iterations: u64,
}

impl From<&ResultRow> for CsvRow {
    fn from(r: &ResultRow) -> Self {
        let rtt_s = r.rtt.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
        Self {
            scenario: r.scenario,
            sweep_index: r.sweep_index,
            seed: r.seed,
            t_req: r.t_req,
            rtt_s,
            energy_j: r.energy_j,
            normalized_energy: r.normalized_energy,
            time_s: r.time_s,
            feasible: r.feasible,
            wifi_share: r.wifi_share,
            iterations: r.iterations,
            inner_iterations: r.inner_iterations,
        }
    }
}

impl TryFrom<CsvRow> for ResultRow {
    type Error = Error;

    fn try_from(r: CsvRow) -> Result<Self> {
        let rtt = if r.rtt_s.is_empty() {
            Vec::new()
        } else {
            r.rtt_s
                .split(';')
                .map(|v| {
                    v.parse()
                        .map_err(|_| Error::Config(format!("bad rtt list {:?}", r.rtt_s)))
                })
                .collect::<Result<_>>()?
        };
        Ok(Self {
            scenario: r.scenario,
            sweep_index: r.sweep_index,
            seed: r.seed,
            t_req: r.t_req,
            rtt,
            energy_j: r.energy_j,
            normalized_energy: r.normalized_energy,
            time_s: r.time_s,
            feasible: r.feasible,
            wifi_share: r.wifi_share,
            iterations: r.iterations,
            inner_iterations: r.inner_iterations,
        })
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(CsvRow::from(row))?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn save_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(rows, std::io::BufWriter::new(file))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    csv::Reader::from_reader(input)
        .deserialize::<CsvRow>()
        .map(|r| ResultRow::try_from(r?))
        .collect()
}

/// Data-weighted share of uploaded bits on radio 0.
pub fn wifi_share(inst: &Instance, plan: &OffloadPlan) -> Option<f64> {
    let (mut on_zero, mut total) = (0.0, 0.0);
    for i in 0..inst.m() {
        if !uploads(inst, plan, i) {
            continue;
        }
        let bits: f64 = inst
            .graph()
            .successors(i)
            .iter()
            .filter(|&&j| plan.placement[j])
            .map(|&j| inst.graph().data(i, j))
            .sum();
        on_zero += bits * plan.split[i][0];
        total += bits;
    }
    (total > 0.0).then(|| on_zero / total)
}

struct Outcome {
    plan: Option<OffloadPlan>,
    feasible: bool,
    iterations: u64,
    inner_iterations: u64,
}

fn run_scenario(inst: &Instance, scenario: Scenario, cfg: &IterativeConfig) -> Result<Outcome> {
    let rule = cfg.downlink_rule;
    let checked = |plan: OffloadPlan| -> Result<Outcome> {
        let feasible = validate_plan(inst, &plan)?.is_empty();
        Ok(Outcome {
            plan: Some(plan),
            feasible,
            iterations: 0,
            inner_iterations: 0,
        })
    };
    match scenario {
        Scenario::Local => checked(baseline_local(inst, rule)?),
        Scenario::Remote => checked(baseline_remote(inst, rule)?.plan),
        Scenario::Exhaustive => {
            let ex_cfg = ExactConfig {
                downlink_rule: rule,
                log: false,
            };
            match exhaustive_solve(inst, &ex_cfg) {
                Ok(res) => Ok(Outcome {
                    plan: Some(res.best_plan),
                    feasible: true,
                    iterations: res.evaluated,
                    inner_iterations: 0,
                }),
                Err(Error::NoFeasiblePlacement { evaluated }) => Ok(Outcome {
                    plan: None,
                    feasible: false,
                    iterations: evaluated,
                    inner_iterations: 0,
                }),
                Err(e) => Err(e),
            }
        }
        Scenario::Iterative => {
            let rep = solve(inst, cfg)?;
            Ok(Outcome {
                plan: Some(rep.plan),
                feasible: rep.feasible,
                iterations: rep.outer_iters as u64,
                inner_iterations: rep.inner_iters_total as u64,
            })
        }
    }
}

fn run_task(spec: &RunSpec, sweep_index: usize, point: Point, seed: u64) -> Result<Vec<ResultRow>> {
    let inst = point.apply(spec.instance(seed)?)?;
    let local = plan_costs(&inst, &baseline_local(&inst, spec.solver.downlink_rule)?)?.energy;
    let rtt: Vec<f64> = inst.radios().iter().map(|r| r.rtt).collect();
    let mut rows = Vec::with_capacity(spec.scenarios.len());
    for &scenario in &spec.scenarios {
        let out = run_scenario(&inst, scenario, &spec.solver)?;
        let costs = out.plan.as_ref().map(|p| plan_costs(&inst, p)).transpose()?;
        let energy = costs.as_ref().map(|c| c.energy);
        let normalized = match scenario {
            // exactly 1 by construction
            Scenario::Local => Some(1.0),
            _ => energy.map(|e| e / local),
        };
        rows.push(ResultRow {
            scenario,
            sweep_index,
            seed,
            t_req: inst.t_req(),
            rtt: rtt.clone(),
            energy_j: energy,
            normalized_energy: normalized,
            time_s: costs.as_ref().map(|c| c.time),
            feasible: out.feasible,
            wifi_share: out.plan.as_ref().and_then(|p| wifi_share(&inst, p)),
            iterations: out.iterations,
            inner_iterations: out.inner_iterations,
        });
    }
    Ok(rows)
}

/// Runs every scenario on every (sweep point, repetition) pair.
///
/// Rows come back ordered by sweep index, then repetition, then scenario in the
/// order given, independent of thread scheduling. Repetition `r` uses seed
/// `spec.seed + r`.
pub fn run(spec: &RunSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let tasks: Vec<(usize, Point, u64)> = spec
        .points()
        .into_iter()
        .enumerate()
        .flat_map(|(idx, point)| (0..spec.reps as u64).map(move |r| (idx, point, spec.seed.wrapping_add(r))))
        .collect();
    let chunks: Vec<Vec<ResultRow>> = tasks
        .into_par_iter()
        .map(|(idx, point, seed)| run_task(spec, idx, point, seed))
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// [`run`] for a deadline sweep of at least two points.
pub fn sweep_deadline(spec: &RunSpec) -> Result<Vec<ResultRow>> {
    match &spec.deadline {
        Deadline::Sweep(s) if s.steps >= 2 => run(spec),
        _ => Err(Error::Config("a deadline sweep needs at least two points".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub scenario: Scenario,
    pub rows: usize,
    pub feasible: usize,
    /// Mean over rows that report an energy.
    pub mean_normalized_energy: Option<f64>,
    pub mean_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenarios: Vec<ScenarioSummary>,
    /// Mean relative excess energy of iterative over exhaustive, percent, over
    /// instances where both are feasible.
    pub iterative_gap_percent: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn summarize(rows: &[ResultRow]) -> Summary {
    let mut present: Vec<Scenario> = rows.iter().map(|r| r.scenario).collect();
    present.sort();
    present.dedup();
    let scenarios = present
        .into_iter()
        .map(|sc| {
            let of = || rows.iter().filter(move |r| r.scenario == sc);
            ScenarioSummary {
                scenario: sc,
                rows: of().count(),
                feasible: of().filter(|r| r.feasible).count(),
                mean_normalized_energy: mean(of().filter_map(|r| r.normalized_energy)),
                mean_time_s: mean(of().filter_map(|r| r.time_s)),
            }
        })
        .collect();

    let exhaustive: std::collections::HashMap<(usize, u64), f64> = rows
        .iter()
        .filter(|r| r.scenario == Scenario::Exhaustive && r.feasible)
        .filter_map(|r| Some(((r.sweep_index, r.seed), r.energy_j?)))
        .collect();
    let gaps = rows
        .iter()
        .filter(|r| r.scenario == Scenario::Iterative && r.feasible)
        .filter_map(|r| {
            let ex = exhaustive.get(&(r.sweep_index, r.seed))?;
            Some(100.0 * (r.energy_j? - ex) / ex)
        });
    Summary {
        scenarios,
        iterative_gap_percent: mean(gaps),
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>, prec: usize| v.map_or("-".to_string(), |x| format!("{x:.prec$}"));
        writeln!(
            f,
            "{:<11} {:>6} {:>9} {:>11} {:>10}",
            "scenario", "rows", "feasible", "norm_energy", "time_s"
        )?;
        for s in &self.scenarios {
            writeln!(
                f,
                "{:<11} {:>6} {:>9} {:>11} {:>10}",
                s.scenario.name(),
                s.rows,
                s.feasible,
                opt(s.mean_normalized_energy, 4),
                opt(s.mean_time_s, 3)
            )?;
        }
        if let Some(gap) = self.iterative_gap_percent {
            writeln!(f, "iterative vs exhaustive gap: {gap:.2}%")?;
        }
        Ok(())
    }
}
