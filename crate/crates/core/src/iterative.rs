//! The iterative Lagrangian-relaxation planner: an inner modification loop
//! over placement and split with fixed multipliers, and an outer subgradient
//! loop over the multipliers.

use serde::{Deserialize, Serialize};

use crate::energy::{plan_costs, PlanCosts};
use crate::error::{Error, Result};
use crate::exact::{fixed_placement_split, least_violating_split};
use crate::lagrangian::{
    deltas, initial_placement, lagrangian_unchecked, nu_star_unchecked, Multipliers, OmegaForm, StepSizes,
};
use crate::profile::{uploads, validate_plan, Instance, OffloadPlan, Violation, FLOW_MARGIN};

pub const DEFAULT_KAPPA: f64 = 0.1;
pub const DEFAULT_PHI: f64 = 0.1;
pub const DEFAULT_ZETA: f64 = 1e-6;

/// How the single downlink radio of each component is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DownlinkRule {
    /// Highest downlink rate, lowest index on ties.
    #[default]
    FastestDownlink,
    Fixed(usize),
}

/// Receive matrix with exactly one radio per component.
pub fn assign_receive(inst: &Instance, rule: DownlinkRule) -> Result<Vec<Vec<bool>>> {
    let radio = receive_radio(inst, rule)?;
    Ok((0..inst.m())
        .map(|_| (0..inst.k()).map(|k| k == radio).collect())
        .collect())
}

pub(crate) fn receive_radio(inst: &Instance, rule: DownlinkRule) -> Result<usize> {
    match rule {
        DownlinkRule::Fixed(k) if k < inst.k() => Ok(k),
        DownlinkRule::Fixed(k) => Err(Error::IndexOutOfRange {
            what: "radio",
            index: k,
            len: inst.k(),
        }),
        DownlinkRule::FastestDownlink => {
            let mut best = 0;
            for (k, r) in inst.radios().iter().enumerate() {
                if r.downlink_rate > inst.radio(best).downlink_rate {
                    best = k;
                }
            }
            Ok(best)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterativeConfig {
    pub steps: StepSizes,
    /// Starting multipliers; `None` uses `kappa = 0.1`, `phi_i = 0.1`, `zeta_k = 1e-6`.
    pub init_mult: Option<Multipliers>,
    pub max_outer: usize,
    pub max_inner: usize,
    pub downlink_rule: DownlinkRule,
    pub omega_form: OmegaForm,
    /// Re-solve the split of every visited placement exactly before picking
    /// the returned plan.
    pub polish_split: bool,
    /// Finish with a local search over single and paired placement flips,
    /// each scored with its exact split. Needs `polish_split`.
    pub refine_flips: bool,
}

impl Default for IterativeConfig {
    fn default() -> Self {
        Self {
            steps: StepSizes::default(),
            init_mult: None,
            max_outer: 500,
            max_inner: 200,
            downlink_rule: DownlinkRule::default(),
            omega_form: OmegaForm::default(),
            polish_split: true,
            refine_flips: true,
        }
    }
}

impl IterativeConfig {
    pub fn validate(&self) -> Result<()> {
        self.steps.validate()?;
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::Config("iteration caps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn initial_multipliers(&self, inst: &Instance) -> Result<Multipliers> {
        let mult = match &self.init_mult {
            Some(m) => m.clone(),
            None => Multipliers::uniform(inst.m(), inst.k(), DEFAULT_KAPPA, DEFAULT_ZETA, DEFAULT_PHI),
        };
        mult.check(inst)?;
        Ok(mult)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub plan: OffloadPlan,
    pub costs: PlanCosts,
    /// Outer (multiplier) iterations run.
    pub outer_iters: usize,
    pub inner_iters_total: usize,
    /// Inner iterations in each outer step.
    pub inner_iters: Vec<usize>,
    /// Multiplier change fell below tolerance on the last outer step.
    pub converged: bool,
    pub feasible: bool,
    pub violations: Vec<Violation>,
    /// Multipliers at the start and after every outer step.
    pub multiplier_history: Vec<Multipliers>,
}

/// Result of one run of the modification loop.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerOutcome {
    /// Lowest-Lagrangian plan seen.
    pub plan: OffloadPlan,
    pub lagrangian: f64,
    pub iterations: usize,
    /// Every plan produced, in order.
    pub visited: Vec<OffloadPlan>,
}

fn with_placement(
    inst: &Instance,
    plan: &OffloadPlan,
    placement: Vec<bool>,
    mult: &Multipliers,
    form: OmegaForm,
) -> OffloadPlan {
    let split = nu_star_unchecked(inst, &placement, plan, mult, form);
    OffloadPlan {
        placement,
        split,
        receive: plan.receive.clone(),
    }
}

fn flip_guard(inst: &Instance, delta: &[f64]) -> bool {
    delta.iter().enumerate().any(|(i, d)| *d < 0.0 && !inst.is_pinned(i))
}

/// Alternates `Delta`, placement and split updates with the multipliers held
/// fixed. When a component's `Delta` changes sign between iterations, the one
/// with the smallest new `Delta` among them is toggled. Stops as soon as the
/// Lagrangian fails to decrease, or after `cfg.max_inner` iterations.
pub fn inner_modification_loop(
    inst: &Instance,
    plan: &OffloadPlan,
    mult: &Multipliers,
    prev_delta: &[f64],
    cfg: &IterativeConfig,
) -> Result<InnerOutcome> {
    plan.check_dims(inst)?;
    mult.check(inst)?;
    if prev_delta.len() != inst.m() {
        return Err(Error::DimensionMismatch(format!(
            "{} deltas for M={}",
            prev_delta.len(),
            inst.m()
        )));
    }
    let form = cfg.omega_form;
    let mut cur = plan.clone();
    let mut cur_l = lagrangian_unchecked(inst, &cur, mult);
    let mut prev_delta = prev_delta.to_vec();
    let mut visited = Vec::new();
    let mut iterations = 0;

    while iterations < cfg.max_inner {
        iterations += 1;
        let delta = deltas(inst, &cur, mult)?;
        let mut placement: Vec<bool> = delta
            .iter()
            .enumerate()
            .map(|(i, d)| *d < 0.0 && !inst.is_pinned(i))
            .collect();
        let flipped = (0..inst.m())
            .filter(|&i| !inst.is_pinned(i) && delta[i] * prev_delta[i] < 0.0)
            .min_by(|&a, &b| delta[a].total_cmp(&delta[b]));
        if let Some(i) = flipped {
            placement[i] = !placement[i];
        }
        let next = with_placement(inst, &cur, placement, mult, form);
        let next_l = lagrangian_unchecked(inst, &next, mult);
        visited.push(next.clone());
        if next_l >= cur_l {
            break;
        }
        cur = next;
        cur_l = next_l;
        prev_delta = delta;
    }
    Ok(InnerOutcome {
        plan: cur,
        lagrangian: cur_l,
        iterations,
        visited,
    })
}

/// Relative change, or absolute change when the new value is zero.
fn settled(old: f64, new: f64, tol: f64) -> bool {
    let change = (new - old).abs();
    if new == 0.0 {
        change < tol
    } else {
        change / new.abs() < tol
    }
}

/// One subgradient step; returns whether every multiplier has settled.
fn update_multipliers(
    inst: &Instance,
    plan: &OffloadPlan,
    costs: &PlanCosts,
    mult: &mut Multipliers,
    steps: &StepSizes,
    s: usize,
) -> bool {
    let decay = 1.0 / (s as f64).sqrt();
    let mut done = true;

    let slack = if inst.t_req().is_finite() {
        inst.t_req() - costs.time
    } else {
        // no deadline: drive kappa to zero
        f64::INFINITY
    };
    let kappa = (mult.kappa - steps.eps_kappa * decay * slack).max(0.0);
    done &= settled(mult.kappa, kappa, steps.tol_kappa);
    mult.kappa = kappa;

    for (k, radio) in inst.radios().iter().enumerate() {
        let headroom = radio.uplink_rate * (1.0 - FLOW_MARGIN) - costs.uplink_load[k];
        let zeta = (mult.zeta[k] - steps.eps_zeta * decay * headroom).max(0.0);
        done &= settled(mult.zeta[k], zeta, steps.tol_zeta);
        mult.zeta[k] = zeta;
    }

    for i in 0..inst.m() {
        if !uploads(inst, plan, i) {
            continue;
        }
        let residual = 1.0 - plan.split[i].iter().sum::<f64>();
        let phi = mult.phi[i] - steps.eps_phi * decay * residual;
        done &= settled(mult.phi[i], phi, steps.tol_phi);
        mult.phi[i] = phi;
    }
    done
}

/// Sum of relative constraint excesses; zero for a feasible plan.
fn violation_score(violations: &[Violation]) -> f64 {
    violations
        .iter()
        .map(|v| match v {
            Violation::Deadline { time, t_req } => (time - t_req) / t_req.max(f64::MIN_POSITIVE),
            Violation::FlowRate { load, capacity, .. } => (load - capacity) / capacity,
            Violation::Allocation { sum, .. } => (sum - 1.0).abs(),
            _ => 1.0,
        })
        .sum()
}

struct Candidate {
    plan: OffloadPlan,
    costs: PlanCosts,
    violations: Vec<Violation>,
    score: f64,
}

impl Candidate {
    fn new(inst: &Instance, plan: OffloadPlan) -> Result<Self> {
        let costs = plan_costs(inst, &plan)?;
        let violations = validate_plan(inst, &plan)?;
        let score = violation_score(&violations);
        Ok(Self {
            plan,
            costs,
            violations,
            score,
        })
    }

    fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    /// Feasible beats infeasible; then lower energy, or lower violation.
    fn better_than(&self, other: &Candidate) -> bool {
        match (self.feasible(), other.feasible()) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => self.costs.energy < other.costs.energy,
            (false, false) => self.score < other.score,
        }
    }
}

/// Runs the full planner and returns the best feasible plan seen, or the
/// least-violating one with `feasible = false`.
pub fn solve(inst: &Instance, cfg: &IterativeConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let mut mult = cfg.initial_multipliers(inst)?;
    let receive_on = receive_radio(inst, cfg.downlink_rule)?;

    let placement = initial_placement(inst, &mult);
    let mut prev_delta: Vec<f64> = (0..inst.m())
        .map(|i| crate::lagrangian::lambda_i(inst, &mult, i))
        .collect::<Result<_>>()?;
    let seed = OffloadPlan::new(placement.clone(), inst.k(), receive_on);
    let mut cur = with_placement(inst, &seed, placement, &mult, cfg.omega_form);

    let mut visited = vec![cur.clone()];
    let mut history = vec![mult.clone()];
    let mut inner_iters = Vec::new();
    let mut converged = false;
    let mut polished = std::collections::HashMap::new();

    for s in 1..=cfg.max_outer {
        let delta = deltas(inst, &cur, &mult)?;
        if flip_guard(inst, &delta) {
            let out = inner_modification_loop(inst, &cur, &mult, &prev_delta, cfg)?;
            inner_iters.push(out.iterations);
            visited.extend(out.visited);
            cur = out.plan;
            prev_delta = deltas(inst, &cur, &mult)?;
        } else {
            inner_iters.push(0);
            prev_delta = delta;
        }
        // refresh the split for the current multipliers
        cur = with_placement(inst, &cur, cur.placement.clone(), &mult, cfg.omega_form);
        visited.push(cur.clone());

        // with polishing on, the primal iterate carries the exact split for its placement
        let primal = if cfg.polish_split {
            let key = cur.placement.clone();
            if !polished.contains_key(&key) {
                let cand = placement_candidate(inst, key.clone(), &cur.receive)?;
                polished.insert(key.clone(), cand);
            }
            polished[&key].plan.clone()
        } else {
            cur.clone()
        };
        let costs = plan_costs(inst, &primal)?;
        converged = update_multipliers(inst, &primal, &costs, &mut mult, &cfg.steps, s);
        history.push(mult.clone());
        if converged && validate_plan(inst, &primal)?.is_empty() {
            break;
        }
    }

    let mut best = pick_best(inst, visited, cfg.polish_split)?;
    // all-local meets any deadline it can, so the search never has to start
    // infeasible; refine from both starts since flips only find local optima
    let local = Candidate::new(inst, OffloadPlan::all_local(inst.m(), inst.k(), receive_on))?;
    if cfg.polish_split && cfg.refine_flips {
        best = refine_flips(inst, best, cfg.max_inner)?;
        if local.better_than(&best) {
            best = refine_flips(inst, local, cfg.max_inner)?;
        }
    } else if local.better_than(&best) {
        best = local;
    }
    let feasible = best.feasible();
    Ok(SolveReport {
        outer_iters: inner_iters.len(),
        inner_iters_total: inner_iters.iter().sum(),
        inner_iters,
        converged,
        feasible,
        plan: best.plan,
        costs: best.costs,
        violations: best.violations,
        multiplier_history: history,
    })
}

fn pick_best(inst: &Instance, visited: Vec<OffloadPlan>, polish: bool) -> Result<Candidate> {
    let mut best: Option<Candidate> = None;
    let mut seen = std::collections::HashSet::new();
    let consider = |c: Candidate, best: &mut Option<Candidate>| {
        if best.as_ref().is_none_or(|b| c.better_than(b)) {
            *best = Some(c);
        }
    };
    for plan in visited {
        if polish && seen.insert(plan.placement.clone()) {
            if let Some(split) = fixed_placement_split(inst, &plan.placement, &plan.receive)? {
                let polished = OffloadPlan { split, ..plan.clone() };
                consider(Candidate::new(inst, polished)?, &mut best);
            }
        }
        consider(Candidate::new(inst, plan)?, &mut best);
    }
    Ok(best.expect("at least the initial plan is visited"))
}

/// The placement scored with its exact split, or with the split of least
/// constraint excess when no split is feasible.
fn placement_candidate(inst: &Instance, placement: Vec<bool>, receive: &[Vec<bool>]) -> Result<Candidate> {
    let split = match fixed_placement_split(inst, &placement, receive)? {
        Some(split) => split,
        None => least_violating_split(inst, &placement, receive)?,
    };
    Candidate::new(
        inst,
        OffloadPlan {
            placement,
            split,
            receive: receive.to_vec(),
        },
    )
}

/// Best-improvement local search from `start` over single flips of free
/// components, falling back to pairs of flips when no single flip helps.
fn refine_flips(inst: &Instance, start: Candidate, max_passes: usize) -> Result<Candidate> {
    let free = inst.free_components();
    let mut best = start;
    for _ in 0..max_passes {
        let receive = best.plan.receive.clone();
        let mut improved: Option<Candidate> = None;
        let try_flips = |flips: &[usize], improved: &mut Option<Candidate>| -> Result<()> {
            let mut placement = best.plan.placement.clone();
            for &i in flips {
                placement[i] = !placement[i];
            }
            let cand = placement_candidate(inst, placement, &receive)?;
            if cand.better_than(improved.as_ref().unwrap_or(&best)) {
                *improved = Some(cand);
            }
            Ok(())
        };
        for &i in &free {
            try_flips(&[i], &mut improved)?;
        }
        if improved.is_none() {
            for (a, &i) in free.iter().enumerate() {
                for &j in &free[a + 1..] {
                    try_flips(&[i, j], &mut improved)?;
                }
            }
        }
        match improved {
            Some(c) => best = c,
            None => break,
        }
    }
    Ok(best)
}
