//! Stability studies: critical flow speed, buckled equilibria, limit
//! cycles, and one-parameter sweeps.

pub mod cycle;
pub mod steady;
pub mod sweep;
pub mod ucrit;

pub use cycle::{detect_limit_cycle, detect_limit_cycle_series, LimitCycleOptions, LimitCycleReport};
pub use steady::{
    solve_steady_state, Continuation, ContinuationParameter, Stability, SteadyOptions, SteadyStateReport,
};
pub use sweep::{run_sweep, RowSummary, SweepAxis, SweepOptions, SweepOutputs, SweepRow, SweepTable};
pub use ucrit::{find_ucrit, CriticalVelocityReport, Probe, UcritOptions};
