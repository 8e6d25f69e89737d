//! Energy-aware offloading planner for component-based mobile applications
//! with several simultaneously usable radio interfaces.
//!
//! An [`Instance`] describes the application graph, the device and the radios.
//! [`iterative::solve`] runs the Lagrangian-relaxation heuristic, and
//! [`exact::exhaustive_solve`] enumerates every placement and solves the
//! remaining linear program over the uplink split exactly.
//!
//! ```
//! use offload_core::{exhaustive_solve, solve, ExactConfig, Instance, IterativeConfig};
//!
//! let inst = Instance::profile14().with_t_req(3.0)?;
//! let heuristic = solve(&inst, &IterativeConfig::default())?;
//! let optimum = exhaustive_solve(&inst, &ExactConfig::default())?;
//! assert!(heuristic.feasible);
//! assert!(optimum.best_energy <= heuristic.costs.energy);
//! println!("{} uses {:.3} J", heuristic.plan.placement_bits(), heuristic.costs.energy);
//! # Ok::<(), offload_core::Error>(())
//! ```

pub mod energy;
pub mod error;
pub mod exact;
pub mod harness;
pub mod iterative;
pub mod lagrangian;
pub mod lp;
pub mod profile;

pub use energy::{plan_costs, ComponentCosts, PlanCosts};
pub use error::{Error, Result, ValidationError};
pub use exact::{baseline_local, baseline_remote, build_lp, exhaustive_solve, ExactConfig, ExactResult};
pub use harness::{run, summarize, ResultRow, RunSpec, Scenario};
pub use iterative::{assign_receive, solve, DownlinkRule, IterativeConfig, SolveReport};
pub use lagrangian::{Multipliers, OmegaForm, StepSizes};
pub use lp::{solve_lp, LinearProgram, LpError, LpSolution};
pub use profile::{validate_plan, AppGraph, DeviceProfile, Instance, OffloadPlan, RadioInterface, Violation};
