//! Device energy and application time for a given offload plan.
//!
//! Transfer times are keyed on the directed dependency edge they serve: the
//! transfer on edge `a -> b` moves `data[a][b]` bits, uplink when `a` is local
//! and `b` is in the cloud, downlink in the opposite case. The per-component
//! terms follow the printed model, including its asymmetries: a cross-entity
//! edge is charged to both endpoints, once with the sender/receiver radio
//! power and once with the idle power, and its transfer time likewise
//! appears in both endpoints' communication time.

use serde::{Deserialize, Serialize};

use crate::error::{check_index, Result};
use crate::profile::{Instance, OffloadPlan, RadioInterface};

/// Time to send `d` bits from the device to the cloud over `radio`.
pub fn uplink_transfer_time(d: f64, radio: &RadioInterface, rtt_model: bool) -> f64 {
    d / radio.uplink_rate + rtt_term(radio, rtt_model)
}

/// Time to receive `d` bits from the cloud over `radio`.
pub fn downlink_transfer_time(d: f64, radio: &RadioInterface, rtt_model: bool) -> f64 {
    d / radio.downlink_rate + rtt_term(radio, rtt_model)
}

fn rtt_term(radio: &RadioInterface, rtt_model: bool) -> f64 {
    if rtt_model {
        radio.rtt / 2.0
    } else {
        0.0
    }
}

/// Uplink time of the data on edge `from -> to` over radio `k`.
pub fn up_time(inst: &Instance, from: usize, to: usize, k: usize) -> f64 {
    uplink_transfer_time(inst.graph().data(from, to), inst.radio(k), inst.rtt_model())
}

/// Downlink time of the data on edge `from -> to` over radio `k`.
pub fn down_time(inst: &Instance, from: usize, to: usize, k: usize) -> f64 {
    downlink_transfer_time(inst.graph().data(from, to), inst.radio(k), inst.rtt_model())
}

/// Per-component energy (J) and time (s) terms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComponentCosts {
    pub e_m: f64,
    pub e_c: f64,
    pub e_com: f64,
    pub t_m: f64,
    pub t_c: f64,
    pub t_com: f64,
}

impl ComponentCosts {
    pub fn energy(&self) -> f64 {
        self.e_m + self.e_c + self.e_com
    }

    pub fn time(&self) -> f64 {
        self.t_m + self.t_c + self.t_com
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanCosts {
    pub per_component: Vec<ComponentCosts>,
    /// Total device energy, J.
    pub energy: f64,
    /// Sum of all component times, s.
    pub time: f64,
    /// Offload traffic per radio, bits/s.
    pub uplink_load: Vec<f64>,
}

/// `(eps_ij_k, eps_ji_k)`: transfer energy charged to component `i` for an
/// edge `i -> j` and for an edge `j -> i` respectively, on radio `k`.
///
/// Each value is computed as if the corresponding edge existed; callers weight
/// them with the dependency indicators.
pub fn edge_energy(inst: &Instance, plan: &OffloadPlan, i: usize, j: usize, k: usize) -> Result<(f64, f64)> {
    check_index("component", i, inst.m())?;
    check_index("component", j, inst.m())?;
    check_index("radio", k, inst.k())?;
    plan.check_dims(inst)?;
    Ok((eps_out(inst, plan, i, j, k), eps_in(inst, plan, i, j, k)))
}

// edge energy when i sends to j
fn eps_out(inst: &Instance, plan: &OffloadPlan, i: usize, j: usize, k: usize) -> f64 {
    let radio = inst.radio(k);
    let p_id = inst.device().idle_power;
    plan.cloud(i) * plan.local(j) * plan.gamma(j, k) * p_id * down_time(inst, i, j, k)
        + plan.local(i) * plan.cloud(j) * plan.nu(i, k) * radio.tx_power * up_time(inst, i, j, k)
}

// edge energy when j sends to i
fn eps_in(inst: &Instance, plan: &OffloadPlan, i: usize, j: usize, k: usize) -> f64 {
    let radio = inst.radio(k);
    let p_id = inst.device().idle_power;
    plan.cloud(i) * plan.local(j) * plan.nu(j, k) * p_id * up_time(inst, j, i, k)
        + plan.local(i) * plan.cloud(j) * plan.gamma(i, k) * radio.rx_power * down_time(inst, j, i, k)
}

pub fn component_costs(inst: &Instance, plan: &OffloadPlan, i: usize) -> Result<ComponentCosts> {
    check_index("component", i, inst.m())?;
    plan.check_dims(inst)?;
    Ok(component_costs_unchecked(inst, plan, i))
}

pub(crate) fn component_costs_unchecked(inst: &Instance, plan: &OffloadPlan, i: usize) -> ComponentCosts {
    let g = inst.graph();
    let (ci, li) = (plan.cloud(i), plan.local(i));
    let mut c = ComponentCosts {
        e_m: li * inst.device().active_power[i] * g.local_time(i),
        e_c: ci * inst.device().idle_power * g.cloud_time(i),
        t_m: li * g.local_time(i),
        t_c: ci * g.cloud_time(i),
        ..ComponentCosts::default()
    };
    if !plan.placement.iter().any(|&p| p != plan.placement[i]) {
        return c;
    }
    for k in 0..inst.k() {
        for &j in g.successors(i) {
            if plan.placement[j] == plan.placement[i] {
                continue;
            }
            c.e_com += eps_out(inst, plan, i, j, k);
            c.t_com += ci * plan.local(j) * plan.gamma(j, k) * down_time(inst, i, j, k)
                + li * plan.cloud(j) * plan.nu(i, k) * up_time(inst, i, j, k);
        }
        for &j in g.predecessors(i) {
            if plan.placement[j] == plan.placement[i] {
                continue;
            }
            c.e_com += eps_in(inst, plan, i, j, k);
            c.t_com += ci * plan.local(j) * plan.nu(j, k) * up_time(inst, j, i, k)
                + li * plan.cloud(j) * plan.gamma(i, k) * down_time(inst, j, i, k);
        }
    }
    c
}

/// Offload traffic on each radio: `sum_i sum_j alpha_ij (1 - I_i) I_j nu_ik r_k`.
pub(crate) fn uplink_load(inst: &Instance, plan: &OffloadPlan) -> Vec<f64> {
    let g = inst.graph();
    let mut load = vec![0.0; inst.k()];
    for (i, j) in g.edges() {
        if !plan.placement[i] && plan.placement[j] {
            for (k, l) in load.iter_mut().enumerate() {
                *l += plan.nu(i, k) * inst.radio(k).demand_rate;
            }
        }
    }
    load
}

pub fn plan_costs(inst: &Instance, plan: &OffloadPlan) -> Result<PlanCosts> {
    plan.check_dims(inst)?;
    let per_component: Vec<ComponentCosts> = (0..inst.m())
        .map(|i| component_costs_unchecked(inst, plan, i))
        .collect();
    let energy = per_component.iter().map(ComponentCosts::energy).sum();
    let time = per_component.iter().map(ComponentCosts::time).sum();
    Ok(PlanCosts {
        per_component,
        energy,
        time,
        uplink_load: uplink_load(inst, plan),
    })
}
