//! Every numeric tolerance used by the library, the checks and the CLI.
//!
//! Tests and `verify` read thresholds from here only.

/// Smallest admissible pivot magnitude in [`crate::linops::solve`].
pub const PIVOT: f64 = 1e-12;
/// Admissible asymmetry for symmetric eigen-solvers.
pub const SYMMETRY: f64 = 1e-10;
/// Row sums of a transition matrix must be within this of one.
pub const ROW_SUM: f64 = 1e-9;
/// State weights must sum to one within this.
pub const WEIGHT_SUM: f64 = 1e-9;
/// Smallest admissible eigenvalue of `Φᵀ Φ` (full column rank).
pub const FULL_RANK: f64 = 1e-10;
/// Residual `‖dᵀP − dᵀ‖∞` required of a stationary distribution.
pub const STATIONARY_RESIDUAL: f64 = 1e-10;
/// Iteration cap for the stationary-distribution power iteration.
pub const POWER_MAX_ITERS: usize = 1_000_000;
/// Relative rank cutoff for minimum-norm least squares.
pub const RANK_CUTOFF: f64 = 1e-12;
/// Residual above which an equilibrium equation is reported inconsistent.
pub const EQUILIBRIUM_CONSISTENCY: f64 = 1e-7;
/// Residual expected of closed-form equilibria on well-posed problems.
pub const EQUILIBRIUM_RESIDUAL: f64 = 1e-8;

/// Centralized flow limit vs `1 ⊗ θ_c` (per coordinate).
pub const CENTRAL_LIMIT: f64 = 1e-6;
/// Distributed flow consensus blocks vs `θ_c` and pairwise (per coordinate).
pub const CONSENSUS_LIMIT: f64 = 1e-5;
/// `L̄ x_T` against the right-hand side of an affine equilibrium equation.
pub const AFFINE_RESIDUAL: f64 = 1e-5;
/// Averaged-θ equation residual for version 2.
pub const AVERAGED_THETA: f64 = 1e-7;
/// Per-step relative slack for Lyapunov monotonicity: `V_{k+1} ≤ V_k + slack·(1 + V_k)`.
pub const LYAPUNOV_SLACK: f64 = 1e-9;
/// RK4 (step `dt`) vs Euler (step `dt/10`) final-state agreement.
pub const RK4_EULER_AGREEMENT: f64 = 1e-4;
/// Adaptive horizon: stop once `‖ẋ‖∞` falls below this.
pub const SETTLE_RATE: f64 = 1e-10;
/// Random-instance consensus limits vs the centralized solution.
pub const RANDOM_LIMIT: f64 = 1e-4;
/// Largest admissible eigenvalue of the spectral-inequality matrix.
pub const SPECTRAL_INEQUALITY: f64 = 1e-10;
/// `dt · max|λ|` above which fixed-step RK4 is flagged as possibly unstable.
pub const DT_STABILITY_WARN: f64 = 2.5;
/// Final `w` consensus error expected from the version-2 experiment.
pub const FINAL_CONSENSUS_ERROR: f64 = 1e-4;
/// Final tracking error relative to the initial one, `e_T < ratio · e_0`.
pub const TRACKING_RATIO: f64 = 1e-8;
