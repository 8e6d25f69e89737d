//! Application, device and radio description, plus offload plans and their
//! constraint checks.
//!
//! Every quantity is stored in SI units: seconds, watts, bits and bits/s.
//! Component and radio indices are 0-based.

mod format;
mod synth;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::energy;
use crate::error::{Error, Result, ValidationError};

pub use format::{load_instance, parse_instance, InstanceFile, Units, BUNDLED_PROFILE14};
pub use synth::{resample_instance, synthesize_instance, ParamRanges};

/// Relative slack applied to the strict flow-rate inequality.
pub const FLOW_MARGIN: f64 = 1e-9;
/// Absolute slack (seconds) when comparing execution time to the deadline.
pub const TIME_TOLERANCE: f64 = 1e-9;
/// Tolerance on per-row split sums.
pub const SPLIT_TOLERANCE: f64 = 1e-9;

/// Component dependency structure with data sizes and execution times.
///
/// Dependencies only point forward in the fixed execution order, so the
/// identity order is always a topological order.
#[derive(Debug, Clone, PartialEq)]
pub struct AppGraph {
    alpha: Vec<Vec<bool>>,
    data: Vec<Vec<f64>>,
    local_time: Vec<f64>,
    cloud_time: Vec<f64>,
    successors: Vec<Vec<usize>>,
    predecessors: Vec<Vec<usize>>,
}

impl AppGraph {
    pub fn new(
        alpha: Vec<Vec<bool>>,
        data: Vec<Vec<f64>>,
        local_time: Vec<f64>,
        cloud_time: Vec<f64>,
    ) -> Result<Self, ValidationError> {
        let m = local_time.len();
        if m < 2 {
            return Err(ValidationError::TooFewComponents(m));
        }
        check_len("cloud_time", m, cloud_time.len())?;
        check_len("alpha", m, alpha.len())?;
        check_len("data", m, data.len())?;
        for i in 0..m {
            check_len("alpha row", m, alpha[i].len())?;
            check_len("data row", m, data[i].len())?;
        }
        check_non_negative("local_time", &local_time)?;
        check_non_negative("cloud_time", &cloud_time)?;

        let mut successors = vec![Vec::new(); m];
        let mut predecessors = vec![Vec::new(); m];
        for i in 0..m {
            check_non_negative("data", &data[i])?;
            for j in 0..m {
                if alpha[i][j] {
                    if i == j {
                        return Err(ValidationError::SelfDependency(i));
                    }
                    if j < i {
                        return Err(ValidationError::BackwardEdge { from: i, to: j });
                    }
                    successors[i].push(j);
                    predecessors[j].push(i);
                } else if data[i][j] != 0.0 {
                    return Err(ValidationError::DataWithoutEdge { from: i, to: j });
                }
            }
        }
        Ok(Self {
            alpha,
            data,
            local_time,
            cloud_time,
            successors,
            predecessors,
        })
    }

    /// A simple chain `0 -> 1 -> ... -> m-1` with `data[i]` bits on edge `i -> i+1`.
    pub fn chain(local_time: Vec<f64>, cloud_time: Vec<f64>, chain_data: &[f64]) -> Result<Self, ValidationError> {
        let m = local_time.len();
        check_len("chain data", m.saturating_sub(1), chain_data.len())?;
        let mut alpha = vec![vec![false; m]; m];
        let mut data = vec![vec![0.0; m]; m];
        for (i, &d) in chain_data.iter().enumerate() {
            alpha[i][i + 1] = true;
            data[i][i + 1] = d;
        }
        Self::new(alpha, data, local_time, cloud_time)
    }

    pub fn m(&self) -> usize {
        self.local_time.len()
    }

    pub fn alpha(&self, i: usize, j: usize) -> bool {
        self.alpha[i][j]
    }

    pub fn alpha_matrix(&self) -> &[Vec<bool>] {
        &self.alpha
    }

    pub fn data(&self, i: usize, j: usize) -> f64 {
        self.data[i][j]
    }

    pub fn data_matrix(&self) -> &[Vec<f64>] {
        &self.data
    }

    pub fn local_time(&self, i: usize) -> f64 {
        self.local_time[i]
    }

    pub fn local_times(&self) -> &[f64] {
        &self.local_time
    }

    pub fn cloud_time(&self, i: usize) -> f64 {
        self.cloud_time[i]
    }

    pub fn cloud_times(&self) -> &[f64] {
        &self.cloud_time
    }

    /// Components `j` with `alpha[i][j] = 1`.
    pub fn successors(&self, i: usize) -> &[usize] {
        &self.successors[i]
    }

    /// Components `j` with `alpha[j][i] = 1`.
    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.predecessors[i]
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.successors[i].len()
    }

    /// All dependency edges `(from, to)` in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(i, succ)| succ.iter().map(move |&j| (i, j)))
    }

    pub fn total_local_time(&self) -> f64 {
        self.local_time.iter().sum()
    }

    pub(crate) fn with_data_and_cloud(
        &self,
        data: Vec<Vec<f64>>,
        cloud_time: Vec<f64>,
    ) -> Result<Self, ValidationError> {
        Self::new(self.alpha.clone(), data, self.local_time.clone(), cloud_time)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioInterface {
    #[serde(default)]
    pub name: String,
    /// bits/s
    pub uplink_rate: f64,
    /// bits/s
    pub downlink_rate: f64,
    /// W
    pub tx_power: f64,
    /// W
    pub rx_power: f64,
    /// Background offered load, bits/s.
    pub demand_rate: f64,
    /// Round-trip time, seconds.
    #[serde(default)]
    pub rtt: f64,
}

impl RadioInterface {
    fn validate(&self, k: usize) -> Result<(), ValidationError> {
        for (field, value) in [
            ("uplink_rate", self.uplink_rate),
            ("downlink_rate", self.downlink_rate),
            ("tx_power", self.tx_power),
            ("rx_power", self.rx_power),
            ("demand_rate", self.demand_rate),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ValidationError::NonPositive { field, index: k, value });
            }
        }
        if !(self.rtt.is_finite() && self.rtt >= 0.0) {
            return Err(ValidationError::Negative {
                field: "rtt",
                index: k,
                value: self.rtt,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    /// Per-component processing power, W.
    pub active_power: Vec<f64>,
    /// W
    pub idle_power: f64,
}

impl DeviceProfile {
    fn validate(&self, m: usize) -> Result<(), ValidationError> {
        check_len("active_power", m, self.active_power.len())?;
        if !(self.idle_power.is_finite() && self.idle_power > 0.0) {
            return Err(ValidationError::NonPositive {
                field: "idle_power",
                index: 0,
                value: self.idle_power,
            });
        }
        for (i, &p) in self.active_power.iter().enumerate() {
            if !p.is_finite() || p <= self.idle_power {
                return Err(ValidationError::ActiveNotAboveIdle {
                    component: i,
                    active: p,
                    idle: self.idle_power,
                });
            }
        }
        Ok(())
    }
}

/// A complete planning problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    graph: AppGraph,
    device: DeviceProfile,
    radios: Vec<RadioInterface>,
    t_req: f64,
    pinned: BTreeSet<usize>,
    rtt_model: bool,
    synthetic_fields: Vec<String>,
}

impl Instance {
    pub fn new(
        graph: AppGraph,
        device: DeviceProfile,
        radios: Vec<RadioInterface>,
        t_req: f64,
        pinned_local: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ValidationError> {
        let m = graph.m();
        device.validate(m)?;
        if radios.is_empty() {
            return Err(ValidationError::NoRadios);
        }
        for (k, radio) in radios.iter().enumerate() {
            radio.validate(k)?;
        }
        check_deadline(t_req)?;
        let pinned: BTreeSet<usize> = pinned_local.into_iter().collect();
        if let Some(&bad) = pinned.iter().find(|&&i| i >= m) {
            return Err(ValidationError::PinnedOutOfRange(bad));
        }
        Ok(Self {
            graph,
            device,
            radios,
            t_req,
            pinned,
            rtt_model: false,
            synthetic_fields: Vec::new(),
        })
    }

    /// Builds an instance with the first and last components pinned to the device.
    pub fn with_default_pins(
        graph: AppGraph,
        device: DeviceProfile,
        radios: Vec<RadioInterface>,
        t_req: f64,
    ) -> Result<Self, ValidationError> {
        let last = graph.m() - 1;
        Self::new(graph, device, radios, t_req, [0, last])
    }

    pub fn graph(&self) -> &AppGraph {
        &self.graph
    }

    pub fn device(&self) -> &DeviceProfile {
        &self.device
    }

    pub fn radios(&self) -> &[RadioInterface] {
        &self.radios
    }

    pub fn radio(&self, k: usize) -> &RadioInterface {
        &self.radios[k]
    }

    pub fn m(&self) -> usize {
        self.graph.m()
    }

    pub fn k(&self) -> usize {
        self.radios.len()
    }

    pub fn t_req(&self) -> f64 {
        self.t_req
    }

    pub fn is_pinned(&self, i: usize) -> bool {
        self.pinned.contains(&i)
    }

    pub fn pinned_local(&self) -> &BTreeSet<usize> {
        &self.pinned
    }

    /// Components the planners are free to place, in increasing order.
    pub fn free_components(&self) -> Vec<usize> {
        (0..self.m()).filter(|i| !self.is_pinned(*i)).collect()
    }

    /// Whether one-way transfers carry an extra `rtt / 2` latency.
    pub fn rtt_model(&self) -> bool {
        self.rtt_model
    }

    pub fn synthetic_fields(&self) -> &[String] {
        &self.synthetic_fields
    }

    pub fn with_t_req(mut self, t_req: f64) -> Result<Self, ValidationError> {
        check_deadline(t_req)?;
        self.t_req = t_req;
        Ok(self)
    }

    pub fn with_rtt_model(mut self, enabled: bool) -> Self {
        self.rtt_model = enabled;
        self
    }

    pub fn with_radio_rtt(mut self, k: usize, rtt: f64) -> Result<Self> {
        crate::error::check_index("radio", k, self.k())?;
        self.radios[k].rtt = rtt;
        self.radios[k].validate(k)?;
        Ok(self)
    }

    pub fn with_synthetic_fields(mut self, fields: Vec<String>) -> Self {
        self.synthetic_fields = fields;
        self
    }

    pub(crate) fn with_graph_and_radios(
        &self,
        graph: AppGraph,
        radios: Vec<RadioInterface>,
    ) -> Result<Self, ValidationError> {
        let mut inst = Self::new(
            graph,
            self.device.clone(),
            radios,
            self.t_req,
            self.pinned.iter().copied(),
        )?;
        inst.rtt_model = self.rtt_model;
        inst.synthetic_fields = self.synthetic_fields.clone();
        Ok(inst)
    }
}

fn check_deadline(t_req: f64) -> Result<(), ValidationError> {
    // +inf is a legitimate "no deadline"
    if t_req.is_nan() || t_req <= 0.0 {
        return Err(ValidationError::NonPositive {
            field: "t_req",
            index: 0,
            value: t_req,
        });
    }
    Ok(())
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), ValidationError> {
    if expected == found {
        Ok(())
    } else {
        Err(ValidationError::Dimension { what, expected, found })
    }
}

fn check_non_negative(field: &'static str, values: &[f64]) -> Result<(), ValidationError> {
    match values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        Some(index) => Err(ValidationError::Negative {
            field,
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// Placement, uplink split and downlink receive radio for every component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffloadPlan {
    /// `true` = executed in the cloud.
    pub placement: Vec<bool>,
    /// Fraction of component i's upload carried by radio k.
    pub split: Vec<Vec<f64>>,
    /// Radio used to receive component i's downlink data (one-hot per row).
    pub receive: Vec<Vec<bool>>,
}

impl OffloadPlan {
    /// Every component local, no uploads, downlink on `receive_radio`.
    pub fn all_local(m: usize, k: usize, receive_radio: usize) -> Self {
        Self::new(vec![false; m], k, receive_radio)
    }

    /// The given placement with a zero split and every row receiving on `receive_radio`.
    pub fn new(placement: Vec<bool>, k: usize, receive_radio: usize) -> Self {
        let m = placement.len();
        let receive = (0..m).map(|_| (0..k).map(|r| r == receive_radio).collect()).collect();
        Self {
            placement,
            split: vec![vec![0.0; k]; m],
            receive,
        }
    }

    pub fn m(&self) -> usize {
        self.placement.len()
    }

    /// `I_i` as 0/1.
    pub fn cloud(&self, i: usize) -> f64 {
        if self.placement[i] {
            1.0
        } else {
            0.0
        }
    }

    /// `1 - I_i`.
    pub fn local(&self, i: usize) -> f64 {
        1.0 - self.cloud(i)
    }

    pub fn nu(&self, i: usize, k: usize) -> f64 {
        self.split[i][k]
    }

    pub fn gamma(&self, i: usize, k: usize) -> f64 {
        if self.receive[i][k] {
            1.0
        } else {
            0.0
        }
    }

    /// Placement as a string of `0`/`1`, component 0 first.
    pub fn placement_bits(&self) -> String {
        self.placement.iter().map(|&c| if c { '1' } else { '0' }).collect()
    }

    pub fn check_dims(&self, inst: &Instance) -> Result<()> {
        let (m, k) = (inst.m(), inst.k());
        let split_ok = self.split.len() == m && self.split.iter().all(|r| r.len() == k);
        let receive_ok = self.receive.len() == m && self.receive.iter().all(|r| r.len() == k);
        if self.placement.len() != m || !split_ok || !receive_ok {
            return Err(Error::DimensionMismatch(format!(
                "plan is not sized for M={m}, K={k} (placement {}, split {}, receive {})",
                self.placement.len(),
                self.split.len(),
                self.receive.len()
            )));
        }
        Ok(())
    }
}

/// Whether component `i` is local and feeds at least one cloud component.
pub fn uploads(inst: &Instance, plan: &OffloadPlan, i: usize) -> bool {
    !plan.placement[i] && inst.graph().successors(i).iter().any(|&j| plan.placement[j])
}

/// One constraint breach found by [`validate_plan`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    PinnedOffloaded {
        component: usize,
    },
    ReceiveNotOneHot {
        component: usize,
    },
    SplitOutOfRange {
        component: usize,
        radio: usize,
        value: f64,
    },
    /// Total execution time exceeds the deadline.
    Deadline {
        time: f64,
        t_req: f64,
    },
    /// Offload traffic on a radio reaches its uplink service rate.
    FlowRate {
        radio: usize,
        load: f64,
        capacity: f64,
    },
    /// Uplink fractions of a component do not sum correctly.
    Allocation {
        component: usize,
        sum: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PinnedOffloaded { component } => {
                write!(f, "pinned component {component} placed in the cloud")
            }
            Violation::ReceiveNotOneHot { component } => {
                write!(f, "component {component} does not receive on exactly one radio")
            }
            Violation::SplitOutOfRange {
                component,
                radio,
                value,
            } => {
                write!(f, "split[{component}][{radio}] = {value} outside [0, 1]")
            }
            Violation::Deadline { time, t_req } => {
                write!(f, "deadline: total time {time} s exceeds {t_req} s")
            }
            Violation::FlowRate { radio, load, capacity } => {
                write!(f, "flow rate: radio {radio} load {load} b/s not below {capacity} b/s")
            }
            Violation::Allocation { component, sum } => {
                write!(f, "allocation: component {component} uplink fractions sum to {sum}")
            }
        }
    }
}

/// Lists every plan invariant or constraint the plan breaks; empty means feasible.
pub fn validate_plan(inst: &Instance, plan: &OffloadPlan) -> Result<Vec<Violation>> {
    plan.check_dims(inst)?;
    let mut out = Vec::new();
    for i in 0..inst.m() {
        if plan.placement[i] && inst.is_pinned(i) {
            out.push(Violation::PinnedOffloaded { component: i });
        }
        if plan.receive[i].iter().filter(|&&g| g).count() != 1 {
            out.push(Violation::ReceiveNotOneHot { component: i });
        }
        for (k, &v) in plan.split[i].iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                out.push(Violation::SplitOutOfRange {
                    component: i,
                    radio: k,
                    value: v,
                });
            }
        }
    }

    let costs = energy::plan_costs(inst, plan)?;
    if costs.time > inst.t_req() + TIME_TOLERANCE {
        out.push(Violation::Deadline {
            time: costs.time,
            t_req: inst.t_req(),
        });
    }
    for (k, radio) in inst.radios().iter().enumerate() {
        let capacity = radio.uplink_rate * (1.0 - FLOW_MARGIN);
        if costs.uplink_load[k] > capacity {
            out.push(Violation::FlowRate {
                radio: k,
                load: costs.uplink_load[k],
                capacity,
            });
        }
    }
    for i in 0..inst.m() {
        let sum: f64 = plan.split[i].iter().sum();
        let ok = if uploads(inst, plan, i) {
            (sum - 1.0).abs() <= SPLIT_TOLERANCE
        } else {
            sum <= 1.0 + SPLIT_TOLERANCE
        };
        if !ok {
            out.push(Violation::Allocation { component: i, sum });
        }
    }
    Ok(out)
}
