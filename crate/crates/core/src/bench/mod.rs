//! Benchmark harness: Mandel and footing setups, the analytic Mandel
//! pressure, single runs, parameter sweeps, timing fits and matrix export.

pub mod export;
pub mod mandel;
pub mod problems;
pub mod runner;
pub mod sweep;
pub mod timing;

pub use export::{export_all, export_system};
pub use mandel::{mandel_pressure, mandel_roots};
pub use problems::{build_problem, FootingConfig, MandelConfig, ProblemParams};
pub use runner::{mandel_pressure_error, run_case, simulate_mandel, CaseSpec, SolveReport, CSV_HEADER};
pub use sweep::{parse_mesh_size, run_sweep, SweepResult, SweepSpec};
pub use timing::{loglog_slope, timing_scaling, TimingResult};
