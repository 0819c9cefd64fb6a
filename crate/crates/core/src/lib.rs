//! Spectral solvers for coupled fourth-order systems
//! `Δ²u_j + β_jΔu_j − α_ju_j = f_j(x, u₁, u₂)` with Navier conditions
//! `u_j = Δu_j = 0` on boxes.
//!
//! The operator factors as `(−Δ−μ₁)(−Δ−μ₂)`; each factor has a Green's kernel
//! with an exact sine expansion, which drives the linear solvers, the kernel
//! constants and the solution map of the nonlinear system. A finite-difference
//! discretization serves as an independent check.

// `!(a > b)` is used on purpose so NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod banded;
pub mod domain;
pub mod error;
pub mod factorization;
pub mod fd;
pub mod field;
pub mod greens;
mod krylov;
pub mod linear;
pub mod nonlinear;
pub mod quadrature;
mod tensor;

pub use domain::{Domain, Mode, SubBox};
pub use error::{Error, Result};
pub use factorization::{
    check_admissible, factor_params, resonance_atlas, resonance_curve, write_resonance_csv,
    AdmissibilityReport, Factorization, ParamPair, ResonancePoint,
};
pub use fd::{fd_eigenvalues, fd_newton, fd_pivot_stats, fd_solve, FdNewtonOptions, FdOperator, PivotStats};
pub use field::{forward_transform, forward_transform_orders, inverse_transform, GridField, SpectralField};
pub use greens::{
    build_kernel, closed_form_1d, closed_form_interval, default_constants_order, default_estimation_grid,
    estimate_constants, verify_lemma21, ConstantsReport, DivergenceAnnotation, GreenKernel, Lemma21Report,
};
pub use linear::{solve_green_quadrature, solve_single_helmholtz, solve_spectral, LinearProblem};
pub use nonlinear::{
    apply_t, cone_margin, estimate_limit_ratios, newton_solve, picard_solve, radius_report, system_constants,
    theorem_hypothesis_check, verify_cone, ConeSpec, Deflation, HypothesisVerdict, LimitRatioReport,
    NewtonOptions, Nonlinearity, PicardOptions, RadiusReport, SolveReport, StatePair, Strategy, SystemParams,
    Table, Theorem,
};
