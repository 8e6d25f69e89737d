//! Closed-form pieces of the relaxed problem: the Lagrangian, the placement
//! indicator `Delta_i` (built from `Lambda_i` and the `Gamma` edge terms) and
//! the uplink split rule driven by `Omega_ik`.
//!
//! `Delta_i` is exact for the component share of the Lagrangian,
//! [`component_lagrangian`]: with every other variable fixed,
//! `L_i(I_i = 1) - L_i(I_i = 0) = Delta_i`.
//!
//! The deadline term is `kappa * (sum_i T_i - T_req)`; the flow-rate term keeps
//! the service rate inside the per-edge sum.

use serde::{Deserialize, Serialize};

use crate::energy::{component_costs_unchecked, down_time, up_time};
use crate::error::{check_index, Error, Result};
use crate::profile::{Instance, OffloadPlan};

/// Deadline (`kappa`), flow-rate (`zeta_k`) and allocation (`phi_i`) multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub kappa: f64,
    pub zeta: Vec<f64>,
    pub phi: Vec<f64>,
}

impl Multipliers {
    pub fn new(kappa: f64, zeta: Vec<f64>, phi: Vec<f64>) -> Self {
        Self { kappa, zeta, phi }
    }

    pub fn zero(m: usize, k: usize) -> Self {
        Self::uniform(m, k, 0.0, 0.0, 0.0)
    }

    pub fn uniform(m: usize, k: usize, kappa: f64, zeta: f64, phi: f64) -> Self {
        Self {
            kappa,
            zeta: vec![zeta; k],
            phi: vec![phi; m],
        }
    }

    pub fn check(&self, inst: &Instance) -> Result<()> {
        if self.zeta.len() != inst.k() || self.phi.len() != inst.m() {
            return Err(Error::DimensionMismatch(format!(
                "multipliers sized ({}, {}) for K={}, M={}",
                self.zeta.len(),
                self.phi.len(),
                inst.k(),
                inst.m()
            )));
        }
        let ok = self.kappa.is_finite()
            && self.kappa >= 0.0
            && self.zeta.iter().all(|z| z.is_finite() && *z >= 0.0)
            && self.phi.iter().all(|p| p.is_finite());
        if !ok {
            return Err(Error::Config(format!("invalid multipliers {self:?}")));
        }
        Ok(())
    }
}

/// Subgradient steps and relative-change convergence tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSizes {
    pub eps_kappa: f64,
    pub eps_zeta: f64,
    pub eps_phi: f64,
    pub tol_kappa: f64,
    pub tol_zeta: f64,
    pub tol_phi: f64,
}

impl Default for StepSizes {
    fn default() -> Self {
        Self {
            // 0.01 leaves kappa drifting for ~100 outer steps on slack deadlines
            eps_kappa: 0.1,
            eps_zeta: 0.01,
            eps_phi: 0.01,
            tol_kappa: 1e-3,
            tol_zeta: 1e-3,
            tol_phi: 1e-3,
        }
    }
}

impl StepSizes {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.eps_kappa,
            self.eps_zeta,
            self.eps_phi,
            self.tol_kappa,
            self.tol_zeta,
            self.tol_phi,
        ];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::Config(format!("step sizes must be positive: {self:?}")))
        }
    }
}

/// How the allocation multiplier enters `Omega_ik`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OmegaForm {
    /// `phi_i` inside the sum over `j`, so it is counted `M` times.
    #[default]
    AsPrinted,
    /// `phi_i` counted once.
    PhiOutsideSum,
}

fn check_state(inst: &Instance, plan: &OffloadPlan, mult: &Multipliers) -> Result<()> {
    plan.check_dims(inst)?;
    mult.check(inst)
}

/// Share of the Lagrangian attributed to component `i`. Summed over all
/// components these give [`lagrangian_value`] plus `kappa * T_req`.
pub fn component_lagrangian(inst: &Instance, plan: &OffloadPlan, mult: &Multipliers, i: usize) -> Result<f64> {
    check_index("component", i, inst.m())?;
    check_state(inst, plan, mult)?;
    Ok(component_lagrangian_unchecked(inst, plan, mult, i))
}

fn component_lagrangian_unchecked(inst: &Instance, plan: &OffloadPlan, mult: &Multipliers, i: usize) -> f64 {
    let g = inst.graph();
    let costs = component_costs_unchecked(inst, plan, i);
    let mut l = costs.energy() + mult.kappa * costs.time();
    for (k, radio) in inst.radios().iter().enumerate() {
        let flow: f64 = g
            .successors(i)
            .iter()
            .map(|&j| plan.local(i) * plan.cloud(j) * plan.nu(i, k) * radio.demand_rate - radio.uplink_rate)
            .sum();
        l += mult.zeta[k] * flow;
    }
    let row: f64 = plan.split[i].iter().sum();
    l + mult.phi[i] * (g.out_degree(i) as f64 * row - 1.0)
}

/// The full Lagrangian.
pub fn lagrangian_value(inst: &Instance, plan: &OffloadPlan, mult: &Multipliers) -> Result<f64> {
    check_state(inst, plan, mult)?;
    Ok(lagrangian_unchecked(inst, plan, mult))
}

pub(crate) fn lagrangian_unchecked(inst: &Instance, plan: &OffloadPlan, mult: &Multipliers) -> f64 {
    let shares: f64 = (0..inst.m())
        .map(|i| component_lagrangian_unchecked(inst, plan, mult, i))
        .sum();
    // an unbounded deadline contributes no constant
    let deadline = if inst.t_req().is_finite() {
        mult.kappa * inst.t_req()
    } else {
        0.0
    };
    shares - deadline
}

/// Placement-only part of `Delta_i`: the cost of moving the computation itself.
pub fn lambda_i(inst: &Instance, mult: &Multipliers, i: usize) -> Result<f64> {
    check_index("component", i, inst.m())?;
    Ok(lambda_unchecked(inst, mult.kappa, i))
}

fn lambda_unchecked(inst: &Instance, kappa: f64, i: usize) -> f64 {
    let g = inst.graph();
    let (tc, tm) = (g.cloud_time(i), g.local_time(i));
    inst.device().idle_power * tc - inst.device().active_power[i] * tm + kappa * (tc - tm)
}

/// `(Gamma_c, Gamma_m)` for the pair `(i, j)`: the edge costs incurred when
/// `i` is in the cloud and `j` local, and when `i` is local and `j` in the cloud.
pub fn gammas(inst: &Instance, plan: &OffloadPlan, mult: &Multipliers, i: usize, j: usize) -> Result<(f64, f64)> {
    check_index("component", i, inst.m())?;
    check_index("component", j, inst.m())?;
    check_state(inst, plan, mult)?;
    Ok(gammas_unchecked(inst, plan, mult, i, j))
}

fn gammas_unchecked(inst: &Instance, plan: &OffloadPlan, mult: &Multipliers, i: usize, j: usize) -> (f64, f64) {
    let g = inst.graph();
    let (out_edge, in_edge) = (g.alpha(i, j), g.alpha(j, i));
    if !out_edge && !in_edge {
        return (0.0, 0.0);
    }
    let kappa = mult.kappa;
    let p_id = inst.device().idle_power;
    let (mut gc, mut gm) = (0.0, 0.0);
    for (k, radio) in inst.radios().iter().enumerate() {
        if out_edge {
            // i -> j: a cloud i sends down to a local j, or a local i uploads to a cloud j
            let (up, down) = (up_time(inst, i, j, k), down_time(inst, i, j, k));
            gc += plan.gamma(j, k) * down;
            gm += plan.nu(i, k) * (up * (radio.tx_power + kappa) + mult.zeta[k] * radio.demand_rate);
        }
        if in_edge {
            // j -> i: a local j uploads to i, or i receives from a cloud j
            let (up, down) = (up_time(inst, j, i, k), down_time(inst, j, i, k));
            gc += plan.nu(j, k) * up;
            gm += plan.gamma(i, k) * down * (radio.rx_power + kappa);
        }
    }
    ((p_id + kappa) * gc, gm)
}

pub fn delta_i(inst: &Instance, plan: &OffloadPlan, mult: &Multipliers, i: usize) -> Result<f64> {
    check_index("component", i, inst.m())?;
    check_state(inst, plan, mult)?;
    Ok(delta_unchecked(inst, plan, mult, i))
}

fn delta_unchecked(inst: &Instance, plan: &OffloadPlan, mult: &Multipliers, i: usize) -> f64 {
    let g = inst.graph();
    let mut delta = lambda_unchecked(inst, mult.kappa, i);
    for &j in g.successors(i).iter().chain(g.predecessors(i)) {
        let (gc, gm) = gammas_unchecked(inst, plan, mult, i, j);
        delta += plan.local(j) * gc - plan.cloud(j) * gm;
    }
    delta
}

/// `Delta_i` for every component.
pub fn deltas(inst: &Instance, plan: &OffloadPlan, mult: &Multipliers) -> Result<Vec<f64>> {
    check_state(inst, plan, mult)?;
    Ok((0..inst.m()).map(|i| delta_unchecked(inst, plan, mult, i)).collect())
}

/// Offload exactly the components with negative indicator; pinned ones stay local.
fn placement_from(inst: &Instance, indicator: impl Iterator<Item = f64>) -> Vec<bool> {
    indicator
        .enumerate()
        .map(|(i, v)| v < 0.0 && !inst.is_pinned(i))
        .collect()
}

/// Starting placement from the sign of `Lambda_i`.
pub fn initial_placement(inst: &Instance, mult: &Multipliers) -> Vec<bool> {
    placement_from(inst, (0..inst.m()).map(|i| lambda_unchecked(inst, mult.kappa, i)))
}

/// Placement from the sign of `Delta_i` at the current plan.
pub fn update_placement(inst: &Instance, plan: &OffloadPlan, mult: &Multipliers) -> Result<Vec<bool>> {
    let d = deltas(inst, plan, mult)?;
    Ok(placement_from(inst, d.into_iter()))
}

pub fn omega(
    inst: &Instance,
    plan: &OffloadPlan,
    mult: &Multipliers,
    i: usize,
    k: usize,
    form: OmegaForm,
) -> Result<f64> {
    check_index("component", i, inst.m())?;
    check_index("radio", k, inst.k())?;
    check_state(inst, plan, mult)?;
    Ok(omega_unchecked(inst, plan, mult, i, k, form))
}

fn omega_unchecked(
    inst: &Instance,
    plan: &OffloadPlan,
    mult: &Multipliers,
    i: usize,
    k: usize,
    form: OmegaForm,
) -> f64 {
    let radio = inst.radio(k);
    let mut total = match form {
        OmegaForm::AsPrinted => inst.m() as f64 * mult.phi[i],
        OmegaForm::PhiOutsideSum => mult.phi[i],
    };
    if !plan.placement[i] {
        for &j in inst.graph().successors(i) {
            if plan.placement[j] {
                total += up_time(inst, i, j, k) * (radio.tx_power + mult.kappa) + mult.zeta[k] * radio.demand_rate;
            }
        }
    }
    total
}

/// Uplink split for the current placement.
///
/// Rows of cloud components and of components without successors are zero.
/// Other rows take `1 - Omega_ik / sum(Omega)`, clamped at zero and
/// normalized to sum to one; a degenerate denominator gives a uniform split.
pub fn nu_star(inst: &Instance, plan: &OffloadPlan, mult: &Multipliers, form: OmegaForm) -> Result<Vec<Vec<f64>>> {
    check_state(inst, plan, mult)?;
    Ok(nu_star_unchecked(inst, &plan.placement, plan, mult, form))
}

/// `nu_star` where only `placement` is taken from the new state; `plan` supplies
/// the rest (receive radios are not used by `Omega`).
pub(crate) fn nu_star_unchecked(
    inst: &Instance,
    placement: &[bool],
    plan: &OffloadPlan,
    mult: &Multipliers,
    form: OmegaForm,
) -> Vec<Vec<f64>> {
    let (m, k) = (inst.m(), inst.k());
    let probe = OffloadPlan {
        placement: placement.to_vec(),
        split: plan.split.clone(),
        receive: plan.receive.clone(),
    };
    let omegas: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..k)
                .map(|r| omega_unchecked(inst, &probe, mult, i, r, form))
                .collect()
        })
        .collect();
    let denom: f64 = omegas.iter().flatten().sum();
    let uniform = vec![1.0 / k as f64; k];

    (0..m)
        .map(|i| {
            if placement[i] || inst.graph().out_degree(i) == 0 {
                return vec![0.0; k];
            }
            if !(denom.is_finite() && denom > 0.0) {
                return uniform.clone();
            }
            let raw: Vec<f64> = omegas[i].iter().map(|o| (1.0 - o / denom).max(0.0)).collect();
            let sum: f64 = raw.iter().sum();
            if sum > 0.0 && sum.is_finite() {
                raw.iter().map(|v| v / sum).collect()
            } else {
                uniform.clone()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::plan_costs;
    use crate::profile::{AppGraph, DeviceProfile, RadioInterface};

    fn radio(up: f64, down: f64, tx: f64, rx: f64) -> RadioInterface {
        RadioInterface {
            name: String::new(),
            uplink_rate: up,
            downlink_rate: down,
            tx_power: tx,
            rx_power: rx,
            demand_rate: 1e5,
            rtt: 0.0,
        }
    }

    fn chain(m: usize, k: usize) -> Instance {
        let graph = AppGraph::chain(vec![0.34; m], vec![0.068; m], &vec![0.8e6; m - 1]).unwrap();
        let device = DeviceProfile {
            active_power: vec![0.6449; m],
            idle_power: 0.022,
        };
        let radios = (0..k).map(|_| radio(0.8e6, 1.76e6, 0.3, 0.1)).collect();
        Instance::with_default_pins(graph, device, radios, 100.0).unwrap()
    }

    fn isolated(m: usize) -> Instance {
        let graph = AppGraph::new(
            vec![vec![false; m]; m],
            vec![vec![0.0; m]; m],
            vec![0.34; m],
            vec![0.068; m],
        )
        .unwrap();
        let device = DeviceProfile {
            active_power: vec![0.6449; m],
            idle_power: 0.022,
        };
        Instance::with_default_pins(graph, device, vec![radio(1e6, 1e6, 0.3, 0.1)], 100.0).unwrap()
    }

    #[test]
    fn zero_multipliers_give_energy() {
        let inst = chain(4, 2);
        let mut plan = OffloadPlan::new(vec![false, true, false, false], 2, 1);
        plan.split[0] = vec![0.3, 0.7];
        let mult = Multipliers::zero(4, 2);
        let l = lagrangian_value(&inst, &plan, &mult).unwrap();
        assert_eq!(l, plan_costs(&inst, &plan).unwrap().energy);
    }

    #[test]
    fn tight_deadline_kappa_term_vanishes() {
        let inst = chain(3, 1);
        let total = inst.graph().total_local_time();
        let inst = inst.with_t_req(total).unwrap();
        let plan = OffloadPlan::all_local(3, 1, 0);
        let mult = Multipliers::uniform(3, 1, 1.0, 0.0, 0.0);
        let l = lagrangian_value(&inst, &plan, &mult).unwrap();
        let e = plan_costs(&inst, &plan).unwrap().energy;
        assert!((l - e).abs() < 1e-12);
    }

    #[test]
    fn lambda_values() {
        let inst = chain(3, 1);
        let mult = Multipliers::zero(3, 1);
        let l = lambda_i(&inst, &mult, 1).unwrap();
        assert!((l - (0.022 * 0.068 - 0.6449 * 0.34)).abs() < 1e-15);
        assert!((l + 0.2178).abs() < 1e-4);

        // equal times: kappa cancels, sign fixed by the power gap
        let graph = AppGraph::chain(vec![0.2; 2], vec![0.2; 2], &[1.0]).unwrap();
        let device = DeviceProfile {
            active_power: vec![0.5; 2],
            idle_power: 0.02,
        };
        let eq = Instance::new(graph, device, vec![radio(1.0, 1.0, 1.0, 1.0)], 1.0, [0]).unwrap();
        for kappa in [0.0, 1.0, 1e6] {
            let mult = Multipliers::uniform(2, 1, kappa, 0.0, 0.0);
            let l = lambda_i(&eq, &mult, 1).unwrap();
            assert!((l - (0.02 - 0.5) * 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_turns_positive_for_slow_cloud() {
        let graph = AppGraph::chain(vec![0.1; 2], vec![0.3; 2], &[1.0]).unwrap();
        let device = DeviceProfile {
            active_power: vec![0.6; 2],
            idle_power: 0.02,
        };
        let inst = Instance::new(graph, device, vec![radio(1.0, 1.0, 1.0, 1.0)], 1.0, [0]).unwrap();
        assert!(lambda_i(&inst, &Multipliers::zero(2, 1), 1).unwrap() < 0.0);
        assert!(lambda_i(&inst, &Multipliers::uniform(2, 1, 10.0, 0.0, 0.0), 1).unwrap() > 0.0);
    }

    #[test]
    fn gamma_reductions() {
        let inst = chain(3, 1);
        let mult = Multipliers::zero(3, 1);
        let mut plan = OffloadPlan::new(vec![false, true, false], 1, 0);
        plan.split[0] = vec![1.0];
        assert_eq!(gammas(&inst, &plan, &mult, 0, 2).unwrap(), (0.0, 0.0));

        // i = 0 uploads its 0.8 Mbit to j = 1 at 0.8 Mbps: Gamma_m = Tx * 1 s
        let (_, gm) = gammas(&inst, &plan, &mult, 0, 1).unwrap();
        assert!((gm - 0.3).abs() < 1e-15);

        // i = 1 sends 0.8 Mbit to local j = 2 over a 1.76 Mbps downlink
        let (gc, _) = gammas(&inst, &plan, &mult, 1, 2).unwrap();
        assert!((gc - 0.022 * 0.8 / 1.76).abs() < 1e-15);
    }

    #[test]
    fn delta_matches_hand_expansion_on_two_nodes() {
        // 0 (pinned, local) -> 1, single radio, nu = 1
        let inst = chain(2, 1);
        let mut plan = OffloadPlan::new(vec![false, false], 1, 0);
        plan.split[0] = vec![1.0];
        let mult = Multipliers::uniform(2, 1, 0.5, 2e-7, 0.1);
        let d1 = delta_i(&inst, &plan, &mult, 1).unwrap();
        // Lambda_1 + (1 - I_0) * (P_id + kappa) * nu_0 * d / R_up
        let lambda = 0.022 * 0.068 - 0.6449 * 0.34 + 0.5 * (0.068 - 0.34);
        let expected = lambda + (0.022 + 0.5) * 1.0;
        assert!((d1 - expected).abs() < 1e-12);
    }

    #[test]
    fn isolated_delta_is_lambda_and_updates_agree() {
        let inst = isolated(4);
        let mult = Multipliers::uniform(4, 1, 0.1, 0.0, 0.1);
        let plan = OffloadPlan::new(vec![false, true, false, false], 1, 0);
        for i in 0..4 {
            assert_eq!(
                delta_i(&inst, &plan, &mult, i).unwrap(),
                lambda_i(&inst, &mult, i).unwrap()
            );
        }
        assert_eq!(
            update_placement(&inst, &plan, &mult).unwrap(),
            initial_placement(&inst, &mult)
        );
    }

    #[test]
    fn expensive_transmission_favours_offloading() {
        // 0 -> 1 -> 2 -> 3 with 1 and 3's neighbours in the cloud and a slow radio
        let graph = AppGraph::chain(vec![0.05; 4], vec![0.05; 4], &[5e6; 3]).unwrap();
        let device = DeviceProfile {
            active_power: vec![0.6; 4],
            idle_power: 0.02,
        };
        let inst = Instance::new(graph, device, vec![radio(0.5e6, 4e6, 1.0, 0.1)], 100.0, [0]).unwrap();
        let mut plan = OffloadPlan::new(vec![false, false, true, false], 1, 0);
        plan.split[1] = vec![1.0];
        let mult = Multipliers::zero(4, 1);
        assert!(delta_i(&inst, &plan, &mult, 1).unwrap() < 0.0);
    }

    #[test]
    fn initial_placement_rules() {
        let inst = Instance::profile14();
        let mult = Multipliers::uniform(14, 2, 0.1, 1e-6, 0.1);
        let p = initial_placement(&inst, &mult);
        let expected: Vec<bool> = (0..14).map(|i| i != 0 && i != 13).collect();
        assert_eq!(p, expected);

        // slow cloud: every Lambda positive
        let graph = AppGraph::chain(vec![0.1; 3], vec![10.0; 3], &[1.0, 1.0]).unwrap();
        let device = DeviceProfile {
            active_power: vec![0.6; 3],
            idle_power: 0.02,
        };
        let slow = Instance::new(graph, device, vec![radio(1.0, 1.0, 1.0, 1.0)], 1.0, []).unwrap();
        assert_eq!(initial_placement(&slow, &Multipliers::zero(3, 1)), vec![false; 3]);
    }

    #[test]
    fn zero_lambda_stays_local() {
        // P_id * tc == P_ac * tm with kappa = 0 and tc = 2 tm, P_ac = 2 P_id
        let graph = AppGraph::chain(vec![0.25; 2], vec![0.5; 2], &[1.0]).unwrap();
        let device = DeviceProfile {
            active_power: vec![0.5; 2],
            idle_power: 0.25,
        };
        let inst = Instance::new(graph, device, vec![radio(1.0, 1.0, 1.0, 1.0)], 1.0, []).unwrap();
        let mult = Multipliers::zero(2, 1);
        assert_eq!(lambda_i(&inst, &mult, 1).unwrap(), 0.0);
        assert_eq!(initial_placement(&inst, &mult), vec![false, false]);
    }

    #[test]
    fn omega_forms() {
        let inst = chain(3, 2);
        let mult = Multipliers::uniform(3, 2, 0.0, 0.0, 0.1);
        let plan = OffloadPlan::new(vec![false, true, false], 2, 0);
        // cloud row: only the phi terms
        assert!((omega(&inst, &plan, &mult, 1, 0, OmegaForm::AsPrinted).unwrap() - 0.3).abs() < 1e-15);
        assert!((omega(&inst, &plan, &mult, 1, 0, OmegaForm::PhiOutsideSum).unwrap() - 0.1).abs() < 1e-15);

        let zero = Multipliers::zero(3, 2);
        let o = omega(&inst, &plan, &zero, 0, 0, OmegaForm::AsPrinted).unwrap();
        assert!((o - 0.3 * 1.0).abs() < 1e-15);
        // identical radios: identical Omega
        let o1 = omega(&inst, &plan, &mult, 0, 1, OmegaForm::AsPrinted).unwrap();
        assert_eq!(omega(&inst, &plan, &mult, 0, 0, OmegaForm::AsPrinted).unwrap(), o1);
    }

    #[test]
    fn nu_star_rows() {
        let inst = chain(4, 2);
        let mult = Multipliers::uniform(4, 2, 0.1, 0.0, 0.1);
        let plan = OffloadPlan::new(vec![false, true, false, false], 2, 0);
        let nu = nu_star(&inst, &plan, &mult, OmegaForm::AsPrinted).unwrap();
        assert_eq!(nu[1], vec![0.0, 0.0]); // cloud
        assert_eq!(nu[3], vec![0.0, 0.0]); // no successors
        assert_eq!(nu[0], vec![0.5, 0.5]); // identical radios
        assert_eq!(nu[2], vec![0.5, 0.5]);
    }

    #[test]
    fn nu_star_prefers_the_cheaper_radio() {
        let graph = AppGraph::chain(vec![0.3; 3], vec![0.06; 3], &[1e6, 1e6]).unwrap();
        let device = DeviceProfile {
            active_power: vec![0.6449; 3],
            idle_power: 0.022,
        };
        let radios = vec![radio(0.8e6, 1.76e6, 0.3, 0.1), radio(2.96e6, 4e6, 0.6, 0.25)];
        let inst = Instance::with_default_pins(graph, device, radios, 10.0).unwrap();
        let plan = OffloadPlan::new(vec![false, true, false], 2, 1);
        let nu = nu_star(
            &inst,
            &plan,
            &Multipliers::uniform(3, 2, 0.1, 0.0, 0.1),
            OmegaForm::PhiOutsideSum,
        )
        .unwrap();
        assert!(nu[0][1] > nu[0][0]);
        assert!((nu[0].iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nu_star_degenerate_denominator_is_uniform() {
        let inst = chain(3, 2);
        let plan = OffloadPlan::new(vec![false, false, false], 2, 0);
        let nu = nu_star(&inst, &plan, &Multipliers::zero(3, 2), OmegaForm::AsPrinted).unwrap();
        assert_eq!(nu[0], vec![0.5, 0.5]);
        assert_eq!(nu[2], vec![0.0, 0.0]);
    }

    #[test]
    fn update_placement_pins() {
        let inst = isolated(5);
        let mult = Multipliers::zero(5, 1);
        let plan = OffloadPlan::all_local(5, 1, 0);
        // every Lambda is negative
        assert_eq!(
            update_placement(&inst, &plan, &mult).unwrap(),
            vec![false, true, true, true, false]
        );
        // slow cloud: every indicator positive
        let graph = AppGraph::new(
            vec![vec![false; 5]; 5],
            vec![vec![0.0; 5]; 5],
            vec![0.1; 5],
            vec![1.0; 5],
        )
        .unwrap();
        let slow = Instance::with_default_pins(graph, inst.device().clone(), inst.radios().to_vec(), 10.0).unwrap();
        let mult = Multipliers::uniform(5, 1, 1.0, 0.0, 0.0);
        assert_eq!(update_placement(&slow, &plan, &mult).unwrap(), vec![false; 5]);
    }

    #[test]
    fn dimension_errors() {
        let inst = chain(3, 1);
        let plan = OffloadPlan::all_local(3, 1, 0);
        assert!(lagrangian_value(&inst, &plan, &Multipliers::zero(2, 1)).is_err());
        assert!(delta_i(&inst, &plan, &Multipliers::zero(3, 1), 3).is_err());
        assert!(omega(&inst, &plan, &Multipliers::zero(3, 1), 0, 1, OmegaForm::AsPrinted).is_err());
    }
}
