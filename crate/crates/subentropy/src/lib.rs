//! # subentropy
//!
//! Sandwiched Renyi relative entropies to von Neumann subalgebras,
//! Pimsner-Popa-type indices, amalgamated/conditional L_p norms, and
//! decoherence-time bounds for self-adjoint quantum Markov semigroups,
//! all at finite dimension.
//!
//! The objects are inclusions `N ⊂ M` of finite-dimensional von Neumann
//! algebras: direct sums of matrix blocks with a faithful trace that assigns
//! a weight to each minimal projection. On top of those the crate computes
//!
//! - `D_p(rho||sigma)`: sandwiched Renyi relative entropy for
//!   `p in [1/2, 1) u (1, inf]`, Umegaki relative entropy at `p = 1`,
//!   and Petz's Renyi variant ([`divergence`]);
//! - `D_p(rho||N) = inf_sigma D_p(rho||sigma)`: the divergence to a
//!   subalgebra, with the optimizing density and solver diagnostics
//!   ([`projection`]), plus the amalgamated `L_1^p` and conditional
//!   `L_inf^q` norms it corresponds to;
//! - `-log lambda(M:N)` and `D_cb(M||N)`: the Pimsner-Popa index and its
//!   completely bounded (stabilized) version, in closed form with exact
//!   rational arithmetic ([`index`]);
//! - decay and decoherence-time certificates for self-adjoint quantum
//!   Markov semigroups, continuous and discrete, with Schur-multiplier
//!   generators as the worked family ([`markov`]).
//!
//! Reproducibility: every randomized routine takes an explicit seed and is
//! bit-stable for a fixed seed; multi-start solvers reduce results in a
//! schedule-independent order. The random generator is
//! `rand_chacha::ChaCha12Rng` throughout.

// index loops mirror the block/matrix notation; negated comparisons are
// deliberate NaN-rejecting guards
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod divergence;
pub mod fixtures;
pub mod index;
pub mod linalg;
pub mod markov;
pub mod projection;
pub mod schema;
pub mod solver;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NonHermitian { asymmetry: f64 },

    #[error("scalar function undefined on retained eigenvalue {eigenvalue:.6e}")]
    DomainError { eigenvalue: f64 },

    #[error("block dimensions are incompatible with the inclusion matrix: {detail}")]
    DimensionMismatch { detail: String },

    #[error("trace weights are incompatible with the inclusion matrix: {detail}")]
    TraceMismatch { detail: String },

    #[error("inclusion is not unital: column {column} of the inclusion matrix is zero")]
    NonUnital { column: usize },

    #[error("element does not belong to the expected algebra")]
    AlgebraMismatch,

    #[error("element is not a density: {reason}")]
    NotDensity { reason: String },

    #[error("renyi order invalid: {reason}")]
    BadOrder { reason: String },

    #[error("solver budget exceeded (stationarity residual {residual:.3e} > {tol:.3e})")]
    SolverBudgetExceeded { residual: f64, tol: f64 },

    #[error("unsupported group or subgroup: {name}")]
    UnsupportedGroup { name: String },

    #[error("matrix is not conditionally negative definite (witness c with c^T b c = {value:.3e})")]
    NotCnd { witness: Vec<f64>, value: f64 },

    #[error("Schur generator has a nonzero diagonal entry at {index}")]
    BadDiagonal { index: usize },

    #[error("Schur generator is not symmetric at ({i},{j})")]
    Asymmetric { i: usize, j: usize },

    #[error("zero pattern is not an equivalence relation: witness ({0}, {1}, {2})", triple.0, triple.1, triple.2)]
    NotEquivalence { triple: (usize, usize, usize) },

    #[error("Schur map is not contractive off the diagonal (mu = {mu})")]
    MuNotContractive { mu: f64 },

    #[error("invalid Schur map: {reason}")]
    InvalidSchurMap { reason: String },

    #[error("evolution time must be nonnegative (got {t})")]
    NegativeTime { t: f64 },

    #[error("generator has no spectral gap (no decaying part)")]
    NoGap,

    #[error("not a partition of unity: {reason}")]
    NotPartition { reason: String },

    #[error("invalid input: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
