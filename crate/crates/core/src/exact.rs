//! Exhaustive search over placements, with the split of each placement
//! solved exactly as a linear program, and the two trivial baselines.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{plan_costs, up_time, PlanCosts};
use crate::error::{Error, Result};
use crate::iterative::{receive_radio, DownlinkRule};
use crate::lp::{min_violation, solve_lp, Constraint, LinearProgram, LpError};
use crate::profile::{Instance, OffloadPlan, FLOW_MARGIN};

/// Largest number of free components [`exhaustive_solve`] will enumerate.
pub const MAX_FREE_COMPONENTS: usize = 24;

// kept strictly inside the validation margin so LP round-off cannot trip it
const LP_FLOW_MARGIN: f64 = 2.0 * FLOW_MARGIN;

/// Components that are local and feed at least one cloud component, in order.
fn uploaders(inst: &Instance, placement: &[bool]) -> Vec<usize> {
    (0..inst.m())
        .filter(|&i| !placement[i] && inst.graph().successors(i).iter().any(|&j| placement[j]))
        .collect()
}

/// The split problem for a fixed placement and receive matrix.
///
/// One column per (uploading component, radio). The objective constant and
/// the deadline row's time constant come from the same plan with a zero split.
/// Rows: the deadline (omitted for an unbounded deadline), one flow-rate row
/// per radio, and one `sum_k nu_ik = 1` row per uploading component.
pub fn build_lp(inst: &Instance, placement: &[bool], receive: &[Vec<bool>]) -> Result<LinearProgram> {
    let (m, k) = (inst.m(), inst.k());
    if placement.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "placement of length {} for M={m}",
            placement.len()
        )));
    }
    let base = OffloadPlan {
        placement: placement.to_vec(),
        split: vec![vec![0.0; k]; m],
        receive: receive.to_vec(),
    };
    let base_costs = plan_costs(inst, &base)?;
    let g = inst.graph();
    let p_id = inst.device().idle_power;

    let rows = uploaders(inst, placement);
    let n = rows.len() * k;
    let mut variable_map = Vec::with_capacity(n);
    let mut objective = Vec::with_capacity(n);
    let mut time = Vec::with_capacity(n);
    let mut flow = vec![vec![0.0; n]; k];
    for &i in &rows {
        let cloud_succ: Vec<usize> = g.successors(i).iter().copied().filter(|&j| placement[j]).collect();
        for (r, radio) in inst.radios().iter().enumerate() {
            let col = variable_map.len();
            variable_map.push((i, r));
            let up: f64 = cloud_succ.iter().map(|&j| up_time(inst, i, j, r)).sum();
            // sender pays Tx power, the cloud-side receiver is charged idle power
            objective.push(up * (radio.tx_power + p_id));
            // the transfer counts in both endpoints' communication time
            time.push(2.0 * up);
            flow[r][col] = cloud_succ.len() as f64 * radio.demand_rate;
        }
    }

    let mut ineq = Vec::with_capacity(k + 1);
    if inst.t_req().is_finite() {
        ineq.push(Constraint::new(time, inst.t_req() - base_costs.time));
    }
    for (r, coeffs) in flow.into_iter().enumerate() {
        ineq.push(Constraint::new(
            coeffs,
            inst.radio(r).uplink_rate * (1.0 - LP_FLOW_MARGIN),
        ));
    }
    let eq = (0..rows.len())
        .map(|row| {
            let mut coeffs = vec![0.0; n];
            coeffs[row * k..(row + 1) * k].fill(1.0);
            Constraint::new(coeffs, 1.0)
        })
        .collect();

    Ok(LinearProgram {
        objective,
        objective_constant: base_costs.energy,
        eq_constraints: eq,
        ineq_constraints: ineq,
        upper_bounds: vec![1.0; n],
        variable_map,
    })
}

fn split_from(inst: &Instance, lp: &LinearProgram, values: &[f64]) -> Vec<Vec<f64>> {
    let mut split = vec![vec![0.0; inst.k()]; inst.m()];
    for (&(i, r), &v) in lp.variable_map.iter().zip(values) {
        split[i][r] = v;
    }
    split
}

/// Optimal split for a fixed placement, or `None` when no split is feasible.
pub fn fixed_placement_split(
    inst: &Instance,
    placement: &[bool],
    receive: &[Vec<bool>],
) -> Result<Option<Vec<Vec<f64>>>> {
    let lp = build_lp(inst, placement, receive)?;
    match solve_lp(&lp) {
        Ok(sol) => Ok(Some(split_from(inst, &lp, &sol.values))),
        Err(LpError::Infeasible) => Ok(None),
        Err(e) => Err(Error::Config(format!("split program: {e}"))),
    }
}

/// Split minimizing the total relative excess over the deadline and
/// flow-rate constraints for a fixed placement.
pub fn least_violating_split(inst: &Instance, placement: &[bool], receive: &[Vec<bool>]) -> Result<Vec<Vec<f64>>> {
    let lp = build_lp(inst, placement, receive)?;
    let mut scales = Vec::with_capacity(lp.ineq_constraints.len());
    if inst.t_req().is_finite() {
        scales.push(inst.t_req());
    }
    scales.extend(inst.radios().iter().map(|r| r.uplink_rate));
    match min_violation(&lp, &scales) {
        Ok((_, values)) => Ok(split_from(inst, &lp, &values)),
        Err(e) => Err(Error::Config(format!("split program: {e}"))),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExactConfig {
    pub downlink_rule: DownlinkRule,
    /// Keep one record per enumerated placement.
    pub log: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementRecord {
    /// `0`/`1` per component, component 0 first.
    pub placement: String,
    pub feasible: bool,
    /// Optimal energy for this placement; `None` when infeasible.
    pub energy: Option<f64>,
    pub time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactResult {
    pub best_plan: OffloadPlan,
    pub best_energy: f64,
    pub best_costs: PlanCosts,
    pub evaluated: u64,
    pub per_placement_log: Option<Vec<PlacementRecord>>,
}

impl ExactResult {
    /// Writes the per-placement log as CSV (`placement,feasible,energy_J,time_s`).
    pub fn write_log_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["placement", "feasible", "energy_J", "time_s"])?;
        for rec in self.per_placement_log.iter().flatten() {
            let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            w.write_record([
                rec.placement.clone(),
                rec.feasible.to_string(),
                num(rec.energy),
                num(rec.time),
            ])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<csv>".into(),
            source,
        })
    }

    pub fn save_log_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_log_csv(std::io::BufWriter::new(file))
    }
}

struct Evaluated {
    placement: Vec<bool>,
    /// Optimal energy and split values when the placement is feasible.
    outcome: Option<(f64, Vec<f64>)>,
}

fn evaluate(inst: &Instance, free: &[usize], mask: u64, receive: &[Vec<bool>]) -> Result<Evaluated> {
    let mut placement = vec![false; inst.m()];
    for (b, &i) in free.iter().enumerate() {
        placement[i] = mask >> b & 1 == 1;
    }
    let lp = build_lp(inst, &placement, receive)?;
    let outcome = match solve_lp(&lp) {
        Ok(sol) => Some((sol.objective, sol.values)),
        Err(LpError::Infeasible) => None,
        Err(e) => return Err(Error::Config(format!("split program: {e}"))),
    };
    Ok(Evaluated { placement, outcome })
}

fn plan_for(inst: &Instance, placement: &[bool], receive: &[Vec<bool>], values: &[f64]) -> Result<OffloadPlan> {
    let lp = build_lp(inst, placement, receive)?;
    Ok(OffloadPlan {
        placement: placement.to_vec(),
        split: split_from(inst, &lp, values),
        receive: receive.to_vec(),
    })
}

/// Lower energy wins, then the lexicographically smaller placement;
/// infeasible placements never win.
fn better(a: Option<Evaluated>, b: Option<Evaluated>) -> Option<Evaluated> {
    let key = |e: &Option<Evaluated>| e.as_ref().and_then(|e| e.outcome.as_ref().map(|o| o.0));
    match (key(&a), key(&b)) {
        (None, _) => b.filter(|e| e.outcome.is_some()),
        (Some(_), None) => a,
        (Some(ea), Some(eb)) => {
            let a_wins = match ea.total_cmp(&eb) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => a.as_ref().map(|e| &e.placement) <= b.as_ref().map(|e| &e.placement),
            };
            if a_wins {
                a
            } else {
                b
            }
        }
    }
}

fn placement_record(inst: &Instance, e: &Evaluated, receive: &[Vec<bool>]) -> Result<PlacementRecord> {
    let time = match &e.outcome {
        Some((_, values)) => Some(plan_costs(inst, &plan_for(inst, &e.placement, receive, values)?)?.time),
        None => None,
    };
    Ok(PlacementRecord {
        placement: e.placement.iter().map(|&c| if c { '1' } else { '0' }).collect(),
        feasible: e.outcome.is_some(),
        energy: e.outcome.as_ref().map(|o| o.0),
        time,
    })
}

/// Enumerates every placement of the non-pinned components and returns the
/// minimum-energy feasible plan; ties go to the lexicographically smallest
/// placement.
pub fn exhaustive_solve(inst: &Instance, cfg: &ExactConfig) -> Result<ExactResult> {
    let free = inst.free_components();
    if free.len() > MAX_FREE_COMPONENTS {
        return Err(Error::TooLarge {
            free: free.len(),
            limit: MAX_FREE_COMPONENTS,
        });
    }
    let radio = receive_radio(inst, cfg.downlink_rule)?;
    let receive: Vec<Vec<bool>> = (0..inst.m())
        .map(|_| (0..inst.k()).map(|k| k == radio).collect())
        .collect();
    let total = 1u64 << free.len();

    let eval = |mask| evaluate(inst, &free, mask, &receive);
    let (best, per_placement_log) = if cfg.log {
        let results: Vec<Evaluated> = (0..total).into_par_iter().map(eval).collect::<Result<_>>()?;
        let records = results
            .iter()
            .map(|e| placement_record(inst, e, &receive))
            .collect::<Result<Vec<_>>>()?;
        let best = results.into_iter().fold(None, |acc, e| better(acc, Some(e)));
        (best, Some(records))
    } else {
        let best = (0..total)
            .into_par_iter()
            .map(|mask| eval(mask).map(Some))
            .try_reduce(|| None, |a, b| Ok(better(a, b)))?;
        (best, None)
    };
    let Some(Evaluated {
        placement,
        outcome: Some((_, values)),
    }) = best
    else {
        return Err(Error::NoFeasiblePlacement { evaluated: total });
    };

    let plan = plan_for(inst, &placement, &receive, &values)?;
    let costs = plan_costs(inst, &plan)?;

    Ok(ExactResult {
        best_energy: costs.energy,
        best_costs: costs,
        best_plan: plan,
        evaluated: total,
        per_placement_log,
    })
}

/// Every component on the device.
pub fn baseline_local(inst: &Instance, rule: DownlinkRule) -> Result<OffloadPlan> {
    Ok(OffloadPlan::all_local(inst.m(), inst.k(), receive_radio(inst, rule)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemoteBaseline {
    pub plan: OffloadPlan,
    /// Whether the split program had a solution; otherwise the split is uniform.
    pub split_feasible: bool,
}

/// Every non-pinned component in the cloud, with the optimal split, or a
/// uniform split when no split satisfies the constraints.
pub fn baseline_remote(inst: &Instance, rule: DownlinkRule) -> Result<RemoteBaseline> {
    let radio = receive_radio(inst, rule)?;
    let placement: Vec<bool> = (0..inst.m()).map(|i| !inst.is_pinned(i)).collect();
    let mut plan = OffloadPlan::new(placement, inst.k(), radio);
    match fixed_placement_split(inst, &plan.placement, &plan.receive)? {
        Some(split) => {
            plan.split = split;
            Ok(RemoteBaseline {
                plan,
                split_feasible: true,
            })
        }
        None => {
            for i in uploaders(inst, &plan.placement) {
                plan.split[i] = vec![1.0 / inst.k() as f64; inst.k()];
            }
            Ok(RemoteBaseline {
                plan,
                split_feasible: false,
            })
        }
    }
}
