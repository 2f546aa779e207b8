//! Default tolerances and budgets, centralized.
//!
//! Experiment runners take these as config defaults; nothing below is
//! hard-coded at a call site.

/// Lattice-point budget for brute-force exponential sums.
pub const LATTICE_POINT_BUDGET: u64 = 100_000_000;

/// Relative tolerance for polytope moment integrals.
pub const POLYTOPE_MOMENT_RTOL: f64 = 1e-6;

/// Tail cutoff for absolutely convergent double sums (empty-J check).
pub const ABS_SUM_TAIL: f64 = 1e-12;

/// Stopping tolerance for matrix-coefficient quadrature refinement.
pub const COEFF_QUAD_TOL: f64 = 1e-10;

/// Maximum node count for the periodic trapezoid rule.
pub const TRAPEZOID_MAX_NODES: usize = 1 << 20;

/// Relative tolerance for ball integrals over the split torus.
pub const BALL_RTOL: f64 = 1e-6;

/// Default maximum ball radius for the real group.
pub const MAX_BALL_RADIUS: f64 = 400.0;

/// Agreement demanded between quadrature and closed-form coefficients.
pub const ORACLE_AGREEMENT: f64 = 1e-8;

/// Slack for the uniform bound on Jacobi-type values.
pub const JACOBI_SLACK: f64 = 1e-12;

/// Shell-bound inequality slack: lhs <= rhs * (1 + SHELL_BOUND_SLACK).
pub const SHELL_BOUND_SLACK: f64 = 1e-6;

/// Exactness tolerance for root-of-unity character arithmetic.
pub const CHARACTER_EXACT: f64 = 1e-10;

/// Unitarity defect allowed for stabilized p-adic type sums.
pub const PADIC_UNITARITY_TOL: f64 = 1e-8;

/// Group-size budget for full character-table enumeration.
pub const K_TYPE_ENUM_BUDGET: u64 = 100_000;

/// Representative budget for a single stabilized coefficient sum.
pub const COEFF_SUM_BUDGET: u64 = 4_000_000;

/// Ball-size budget for discrete-group breadth-first balls.
pub const FOLNER_BALL_BUDGET: usize = 10_000_000;

/// Spread allowed between diagonal formal-degree estimates.
pub const SCHUR_DIAGONAL_SPREAD: f64 = 0.10;

/// Ceiling for zero-pairing ratios, relative to the diagonal ratio.
pub const SCHUR_CROSS_DECAY: f64 = 0.05;

/// Agreement between growth constants under two norm choices.
pub const NORM_INDEPENDENCE_TOL: f64 = 0.05;

/// Relative discrepancy allowed in the character-formula check.
pub const CHARACTER_FORMULA_TOL: f64 = 0.10;

/// Appendix-suite acceptance window: |ratio - limit| <= this * (1 + limit).
pub const APPENDIX_SUITE_TOL: f64 = 0.05;

/// Roundoff slack used when comparing two already-converged errors.
pub const CONVERGENCE_COMPARE_SLACK: f64 = 1e-6;
