//! Cost-efficient deployment of passive and active intelligent reflecting
//! surfaces for indoor LoS coverage.
//!
//! The crate models a grid-partitioned region with a base station and
//! candidate surface locations, evaluates worst-case per-cell SNR over
//! multi-reflection LoS paths, and searches surface locations, roles and
//! tile counts for the cheapest plan meeting an SNR target everywhere.

pub mod channel;
pub mod cost;
pub mod deploy;
pub mod error;
pub mod plan;
pub mod routing;
pub mod scenario;
pub mod snr;
pub mod tiles;
pub mod units;

pub use cost::{total_cost, Cost, CostBreakdown, CostModel};
pub use error::{Error, Result, ScenarioError};
pub use plan::{CellId, DeploymentPlan, Locations, PlanView, Role};
pub use routing::{evaluate_plan, overall_snr, PathKind, PathSolution, Router};
pub use scenario::{load_scenario, Scenario};
