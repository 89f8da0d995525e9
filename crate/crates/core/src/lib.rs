//! Multi-objective (makespan, cost) scheduling of workflow DAGs on rented
//! cloud VMs.
//!
//! - [`workflow`]: validated DAGs, JSON/DAX ingestion and synthetic shapes.
//! - [`catalog`]: VM types, hourly prices and price ranks.
//! - [`sim`]: the deterministic event simulator that scores schedules.
//! - [`riot`]: B-rank ordering, probabilistic task grouping and surrogate
//!   scoring of VM-type mappings.
//! - [`baselines`]: random search and an earliest-finish-time list scheduler.
//! - [`metrics`]: dominance, hypervolume, IGD and spread.
//! - [`frontier`]: scheduler output and its CSV/JSON encodings.

pub mod baselines;
pub mod catalog;
pub mod frontier;
pub mod metrics;
pub mod riot;
pub mod rng;
pub mod sim;
pub mod workflow;

pub use baselines::{heft_schedule, random_search, BaselineError, Budget};
pub use catalog::{default_catalog, load_catalog, Catalog, CatalogError, VmType};
pub use frontier::{FrontierError, FrontierPoint, Provenance, RunMeta, ScheduleFrontier};
pub use metrics::{hypervolume, igd, nondominated, normalize, spread, Bounds, IgdDirection, MetricsError, ObjectivePoint};
pub use riot::{riot_schedule, Clustering, RiotError, RiotOutcome, RiotParams, TypeMapping};
pub use sim::{simulate, CountingSimulator, Evaluation, EventSimulator, Schedule, ScheduleDoc, SimError, Simulator};
pub use workflow::{DataEdge, Shape, Task, TaskIdx, Workflow, WorkflowError};

/// Crate version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
