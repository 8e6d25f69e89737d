//! Seeded random instances for benchmarking and repeated experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{AppGraph, DeviceProfile, Instance, RadioInterface};
use crate::error::{Error, Result};

/// Closed `[min, max]` ranges that synthetic quantities are drawn from (SI units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub local_time: (f64, f64),
    pub data_bits: (f64, f64),
    /// `cloud_time = local_time / speedup`
    pub cloud_speedup: (f64, f64),
    pub uplink_rate: (f64, f64),
    pub downlink_rate: (f64, f64),
    pub tx_power: (f64, f64),
    pub rx_power: (f64, f64),
    pub active_power: (f64, f64),
    pub idle_power: f64,
    pub rtt: (f64, f64),
    /// Mean of the Poisson demand-rate draw, bits/s.
    pub demand_mean: f64,
    /// Demand rates are Poisson counts of this many bits/s.
    pub demand_quantum: f64,
    /// Probability of an extra forward edge between non-adjacent components.
    pub extra_edge_prob: f64,
    /// Deadline; `None` means the all-local execution time.
    pub t_req: Option<f64>,
}

impl Default for ParamRanges {
    fn default() -> Self {
        Self {
            local_time: (0.03, 0.9),
            data_bits: (0.1e6, 2e6),
            cloud_speedup: (4.0, 6.0),
            uplink_rate: (0.8e6, 2.96e6),
            downlink_rate: (1.76e6, 4e6),
            tx_power: (0.3, 0.6),
            rx_power: (0.1, 0.25),
            active_power: (0.6449, 0.6449),
            idle_power: 0.022,
            rtt: (0.04, 0.05),
            demand_mean: 1.5e6,
            demand_quantum: 0.1e6,
            extra_edge_prob: 0.1,
            t_req: None,
        }
    }
}

impl ParamRanges {
    pub fn with_cloud_speedup(mut self, speedup: f64) -> Self {
        self.cloud_speedup = (speedup, speedup);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("local_time", self.local_time, 0.0),
            ("data_bits", self.data_bits, 0.0),
            ("cloud_speedup", self.cloud_speedup, f64::MIN_POSITIVE),
            ("uplink_rate", self.uplink_rate, f64::MIN_POSITIVE),
            ("downlink_rate", self.downlink_rate, f64::MIN_POSITIVE),
            ("tx_power", self.tx_power, f64::MIN_POSITIVE),
            ("rx_power", self.rx_power, f64::MIN_POSITIVE),
            ("active_power", self.active_power, f64::MIN_POSITIVE),
            ("rtt", self.rtt, 0.0),
        ];
        for (name, (lo, hi), floor) in ranges {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi || lo < floor {
                return Err(Error::InvalidRanges(format!("{name}: [{lo}, {hi}]")));
            }
        }
        if !(self.active_power.0 > self.idle_power && self.idle_power > 0.0) {
            return Err(Error::InvalidRanges("active power must exceed idle power > 0".into()));
        }
        if !(self.demand_mean > 0.0 && self.demand_quantum > 0.0) {
            return Err(Error::InvalidRanges("demand mean and quantum must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.extra_edge_prob) {
            return Err(Error::InvalidRanges(format!(
                "extra_edge_prob {}",
                self.extra_edge_prob
            )));
        }
        Ok(())
    }
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn draw_demand(rng: &mut ChaCha8Rng, ranges: &ParamRanges) -> f64 {
    let lambda = ranges.demand_mean / ranges.demand_quantum;
    let count: f64 = Poisson::new(lambda).expect("positive mean").sample(rng);
    count.max(1.0) * ranges.demand_quantum
}

/// A random chain-plus-forward-edges application with `m` components and `k` radios.
///
/// The first and last components are pinned to the device. Deterministic in `seed`.
pub fn synthesize_instance(m: usize, k: usize, seed: u64, ranges: &ParamRanges) -> Result<Instance> {
    ranges.validate()?;
    if m < 2 || k < 1 {
        return Err(Error::InvalidRanges(format!(
            "need m >= 2 and k >= 1, got m={m}, k={k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let local_time: Vec<f64> = (0..m).map(|_| draw(&mut rng, ranges.local_time)).collect();
    let cloud_time = local_time
        .iter()
        .map(|t| t / draw(&mut rng, ranges.cloud_speedup))
        .collect();
    let mut alpha = vec![vec![false; m]; m];
    let mut data = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            if j == i + 1 || rng.random_bool(ranges.extra_edge_prob) {
                alpha[i][j] = true;
                data[i][j] = draw(&mut rng, ranges.data_bits);
            }
        }
    }
    let graph = AppGraph::new(alpha, data, local_time, cloud_time)?;

    let active_power = (0..m).map(|_| draw(&mut rng, ranges.active_power)).collect();
    let device = DeviceProfile {
        active_power,
        idle_power: ranges.idle_power,
    };
    let radios = (0..k)
        .map(|idx| RadioInterface {
            name: format!("radio{idx}"),
            uplink_rate: draw(&mut rng, ranges.uplink_rate),
            downlink_rate: draw(&mut rng, ranges.downlink_rate),
            tx_power: draw(&mut rng, ranges.tx_power),
            rx_power: draw(&mut rng, ranges.rx_power),
            demand_rate: draw_demand(&mut rng, ranges),
            rtt: draw(&mut rng, ranges.rtt),
        })
        .collect();
    let t_req = ranges.t_req.unwrap_or_else(|| graph.total_local_time());
    let inst = Instance::with_default_pins(graph, device, radios, t_req)?;
    Ok(inst.with_synthetic_fields(vec!["*".into()]))
}

/// Redraws the quantities that are not measured on a real device: data sizes on
/// the existing edges, cloud execution times and radio demand rates. Structure,
/// powers, radio rates, local times and the deadline are kept.
pub fn resample_instance(base: &Instance, seed: u64, ranges: &ParamRanges) -> Result<Instance> {
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = base.graph();
    let m = g.m();
    let cloud_time = (0..m)
        .map(|i| g.local_time(i) / draw(&mut rng, ranges.cloud_speedup))
        .collect();
    let mut data = vec![vec![0.0; m]; m];
    for (i, j) in g.edges() {
        data[i][j] = draw(&mut rng, ranges.data_bits);
    }
    let graph = g.with_data_and_cloud(data, cloud_time)?;
    let radios = base
        .radios()
        .iter()
        .map(|r| RadioInterface {
            demand_rate: draw_demand(&mut rng, ranges),
            ..r.clone()
        })
        .collect();
    Ok(base.with_graph_and_radios(graph, radios)?)
}
