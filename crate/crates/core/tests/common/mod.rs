//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use offload_core::lagrangian::Multipliers;
use offload_core::profile::{synthesize_instance, ParamRanges};
use offload_core::{Instance, LinearProgram, OffloadPlan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn b(x: bool) -> f64 {
    if x {
        1.0
    } else {
        0.0
    }
}

/// Energy and time of one component, expanded term by term over all `j` and
/// `k` with the dependency indicators as plain factors.
pub fn literal_component(inst: &Instance, plan: &OffloadPlan, i: usize) -> (f64, f64) {
    let g = inst.graph();
    let m = inst.m();
    let p_id = inst.device().idle_power;
    let ii = b(plan.placement[i]);
    let rtt = |k: usize| if inst.rtt_model() { inst.radio(k).rtt / 2.0 } else { 0.0 };
    // mobile -> cloud and cloud -> mobile transfer times of d_ab on radio k
    let tau_mc = |a: usize, c: usize, k: usize| g.data(a, c) / inst.radio(k).uplink_rate + rtt(k);
    let tau_cm = |a: usize, c: usize, k: usize| g.data(a, c) / inst.radio(k).downlink_rate + rtt(k);
    let nu = |a: usize, k: usize| plan.split[a][k];
    let gam = |a: usize, k: usize| b(plan.receive[a][k]);

    let e_m = (1.0 - ii) * inst.device().active_power[i] * g.local_time(i);
    let e_c = ii * p_id * g.cloud_time(i);
    let t_m = (1.0 - ii) * g.local_time(i);
    let t_c = ii * g.cloud_time(i);
    let (mut e_com, mut t_com) = (0.0, 0.0);
    for j in 0..m {
        let ij = b(plan.placement[j]);
        let a_ij = b(g.alpha(i, j));
        let a_ji = b(g.alpha(j, i));
        for k in 0..inst.k() {
            let r = inst.radio(k);
            let eps_ij = ii * (1.0 - ij) * gam(j, k) * p_id * tau_cm(i, j, k)
                + (1.0 - ii) * ij * nu(i, k) * r.tx_power * tau_mc(i, j, k);
            let eps_ji = ii * (1.0 - ij) * nu(j, k) * p_id * tau_mc(j, i, k)
                + (1.0 - ii) * ij * gam(i, k) * r.rx_power * tau_cm(j, i, k);
            e_com += a_ij * eps_ij + a_ji * eps_ji;
            t_com += a_ij
                * (ii * (1.0 - ij) * gam(j, k) * tau_cm(i, j, k) + (1.0 - ii) * ij * nu(i, k) * tau_mc(i, j, k))
                + a_ji * (ii * (1.0 - ij) * nu(j, k) * tau_mc(j, i, k) + (1.0 - ii) * ij * gam(i, k) * tau_cm(j, i, k));
        }
    }
    (e_m + e_c + e_com, t_m + t_c + t_com)
}

/// `(total energy, total time)` by summing [`literal_component`].
pub fn literal_totals(inst: &Instance, plan: &OffloadPlan) -> (f64, f64) {
    (0..inst.m())
        .map(|i| literal_component(inst, plan, i))
        .fold((0.0, 0.0), |(e, t), (de, dt)| (e + de, t + dt))
}

/// Component share of the Lagrangian: energy, deadline, flow-rate and
/// allocation terms of component `i`.
pub fn literal_component_lagrangian(inst: &Instance, plan: &OffloadPlan, mult: &Multipliers, i: usize) -> f64 {
    let g = inst.graph();
    let (e, t) = literal_component(inst, plan, i);
    let ii = b(plan.placement[i]);
    let mut l = e + mult.kappa * t;
    for k in 0..inst.k() {
        let r = inst.radio(k);
        for j in 0..inst.m() {
            let ij = b(plan.placement[j]);
            l += mult.zeta[k] * b(g.alpha(i, j)) * ((1.0 - ii) * ij * plan.split[i][k] * r.demand_rate - r.uplink_rate);
        }
    }
    let mut alloc = -1.0;
    for j in 0..inst.m() {
        for k in 0..inst.k() {
            alloc += b(g.alpha(i, j)) * plan.split[i][k];
        }
    }
    l + mult.phi[i] * alloc
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// A small random instance with `m` in `2..=max_m`, `k` in `1..=max_k` and a
/// random deadline, RTT model and edge density.
pub fn random_instance(rng: &mut ChaCha8Rng, max_m: usize, max_k: usize) -> Instance {
    let m = rng.random_range(2..=max_m);
    let k = rng.random_range(1..=max_k);
    let ranges = ParamRanges {
        extra_edge_prob: rng.random_range(0.0..0.6),
        ..ParamRanges::default()
    };
    let inst = synthesize_instance(m, k, rng.random(), &ranges).unwrap();
    let t_req = inst.graph().total_local_time() * rng.random_range(0.3..1.5);
    inst.with_t_req(t_req).unwrap().with_rtt_model(rng.random_bool(0.5))
}

/// A plan with random placement (pinning ignored), random fractions in
/// `[0, 1]` on every row and a random one-hot receive radio per component.
pub fn random_plan(rng: &mut ChaCha8Rng, inst: &Instance) -> OffloadPlan {
    let (m, k) = (inst.m(), inst.k());
    let placement = (0..m).map(|_| rng.random_bool(0.5)).collect();
    let split = (0..m)
        .map(|_| (0..k).map(|_| rng.random_range(0.0..=1.0)).collect())
        .collect();
    let receive = (0..m)
        .map(|_| {
            let pick = rng.random_range(0..k);
            (0..k).map(|r| r == pick).collect()
        })
        .collect();
    OffloadPlan {
        placement,
        split,
        receive,
    }
}

pub fn random_multipliers(rng: &mut ChaCha8Rng, inst: &Instance) -> Multipliers {
    Multipliers::new(
        rng.random_range(0.0..2.0),
        (0..inst.k()).map(|_| rng.random_range(0.0..1e-6)).collect(),
        (0..inst.m()).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )
}

/// Minimum of the objective over a grid of step `1 / steps` on each
/// allocation row's simplex. Supports at most two rows of two radios, or one
/// row of three. `None` when no grid point is feasible.
pub fn grid_minimum(lp: &LinearProgram, steps: usize) -> Option<f64> {
    let n = lp.objective.len();
    let rows = lp.eq_constraints.len();
    assert!(rows >= 1 && n.is_multiple_of(rows), "unexpected shape");
    let k = n / rows;
    for (r, row) in lp.eq_constraints.iter().enumerate() {
        let expected: Vec<f64> = (0..n).map(|c| if c / k == r { 1.0 } else { 0.0 }).collect();
        assert_eq!(row.coeffs, expected, "allocation rows must be consecutive blocks");
        assert_eq!(row.bound, 1.0);
    }
    let h = 1.0 / steps as f64;
    let row_points: Vec<Vec<f64>> = match k {
        2 => (0..=steps).map(|a| vec![a as f64 * h, 1.0 - a as f64 * h]).collect(),
        3 => (0..=steps)
            .flat_map(|a| (0..=steps - a).map(move |c| vec![a as f64 * h, c as f64 * h, 1.0 - (a + c) as f64 * h]))
            .collect(),
        _ => panic!("grid oracle supports two or three radios"),
    };
    let feasible = |x: &[f64]| {
        lp.ineq_constraints.iter().all(|row| {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            lhs <= row.bound + 1e-12 * row.bound.abs().max(1.0)
        })
    };
    let value = |x: &[f64]| lp.objective_constant + lp.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>();

    let mut best: Option<f64> = None;
    let mut x = vec![0.0; n];
    let mut consider = |x: &[f64]| {
        if feasible(x) {
            let v = value(x);
            if best.is_none_or(|b| v < b) {
                best = Some(v);
            }
        }
    };
    match rows {
        1 => {
            for p in &row_points {
                x.copy_from_slice(p);
                consider(&x);
            }
        }
        2 => {
            for p in &row_points {
                x[..k].copy_from_slice(p);
                for q in &row_points {
                    x[k..].copy_from_slice(q);
                    consider(&x);
                }
            }
        }
        _ => panic!("grid oracle supports at most two allocation rows"),
    }
    best
}
