//! Numerical and statistical checks built on the core algorithms.

pub mod algebra;
pub mod bench;
pub mod oracle;
pub mod random;
pub mod simulation;

pub use algebra::{
    centering_projector, cheng_matrix, hat_matrix, idempotent_check, ldlt_semidefinite,
    ss_condition_residual, student_root_error, verify_ss_condition, verify_student_roots,
    ChengFactor,
};
pub use bench::{benchmark_apply, ApplyMethod, BenchReport, BenchRow};
pub use oracle::{oracle_compare, oracle_compare_with_selection};
pub use simulation::{
    monte_carlo, simulation_design, Construction, SimulationConfig, SimulationReport,
};
