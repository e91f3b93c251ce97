//! Distributed query execution and the benchmark workload.

pub mod builder;
pub mod executor;
pub mod expr;
pub mod plan;
pub mod queries;
pub mod refresh;
pub mod result;

pub use builder::{PlanContext, Rel, RelDist};
pub use executor::{execute, execute_with, ExecOptions, ExecStats, QueryOutput};
pub use plan::PhysicalPlan;
pub use queries::{default_plan, plan_for, QueryId, QueryParams};
pub use refresh::{run_refresh, RefreshId, RefreshOutcome};
pub use result::ResultSet;
