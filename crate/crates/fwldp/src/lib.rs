//! Computational toolkit for Freidlin–Wentzell large deviations of small-noise
//! SDEs whose coefficients need not be globally Lipschitz.
//!
//! The object of study is the family of Itô equations
//!
//! ```text
//!     dX^ε(t) = b(t, X^ε(t)) dt + √ε σ(t, X^ε(t)) dB(t),    X^ε(0) = x₀,
//! ```
//!
//! on a finite horizon [0, T].  As ε ↓ 0 the laws of X^ε satisfy a large
//! deviation principle on C([0, T]; ℝᵈ) with the uniform metric ρ and rate
//! function
//!
//! ```text
//!     I(y) = inf { ½ ∫₀ᵀ |h(t)|² dt  :  y = x^h },
//! ```
//!
//! where x^h is the *skeleton* path driven by a square-integrable control h:
//!
//! ```text
//!     dx^h(t) = b(t, x^h) dt + σ(t, x^h) h(t) dt,    x^h(0) = x₀.
//! ```
//!
//! The standard global Lipschitz/linear-growth route is replaced by two
//! sampled structural hypotheses: a locally weak monotonicity bound with a
//! concave modulus η_R, and a Lyapunov drift condition with weight f and
//! modulus γ.  This crate makes each ingredient executable:
//!
//! * [`model`] / [`registry`] — SDE definitions bundled with their Lyapunov
//!   and monotonicity certificates, plus a registry of worked examples
//!   (Hölder-1/3 diffusion, singular power drift, Duffing–van der Pol,
//!   SIR epidemic, 3-species stochastic Lotka–Volterra) and two analytically
//!   solvable controls (Brownian motion, Ornstein–Uhlenbeck).
//! * [`integrate`] — tamed Euler–Maruyama simulation of the SDE, the skeleton
//!   ODE, and the controlled SDE, sharing one stepping core so that the ε = 0
//!   degeneracies are exact; the uniform metric ρ.
//! * [`verify`] — deterministic sampled audits of the structural assumptions
//!   with reproducible worst-case certificates.
//! * [`action`] — the minimum-action problem inf { ½‖h‖² : x^h(T) hits a
//!   target } via quadratic penalty, discrete adjoint gradients, and L-BFGS.
//! * [`mc`] — rare-event Monte Carlo under LDP scaling and direct numerical
//!   realizations of the two convergence statements behind the weak
//!   convergence proof (continuity in the control, and ρ(Y^ε, Z^ε) → 0 in
//!   probability).
//! * [`io`] — full-precision CSV/JSON emission and parsing for every table.
//!
//! Noise is counter-based ([`rng`]): the k-th Gaussian increment of sample j
//! is a pure function of (seed, j, k), so Monte Carlo results are bit-identical
//! for any thread count.

pub mod action;
pub mod grid;
pub mod integrate;
pub mod io;
pub mod mc;
pub mod model;
pub mod registry;
pub mod rng;
pub mod verify;

pub use action::{
    action_functional, adjoint_gradient, minimize_endpoint_action, OptimizerOptions, RateResult,
    RateStatus, TargetKind, TargetSpec,
};
pub use grid::{Control, GridError, Path, PathLabel, TimeGrid};
pub use integrate::{
    simulate_controlled, simulate_controlled_sample, simulate_sde, simulate_sde_sample,
    solve_skeleton, uniform_distance, SolveError,
};
pub use mc::{
    convergence_statement_ii, estimate_rare_event, ldp_scaling_report, sinusoid_family,
    weak_convergence_statement_i, ConvergenceRow, EventSpec, MCEstimate, ScalingRow, WeakRow,
};
pub use model::{
    eval_lyapunov_expression, Domain, LyapunovBundle, ModelError, ModelSpec, ModulusSpec,
    MonotonicityBundle,
};
pub use registry::{build_model, registered_models};
pub use verify::{
    audit_integrability, audit_lyapunov, audit_monotonicity, audit_ratio, lyapunov_margin,
    monotonicity_margin, trace_margin, AssumptionTag, AuditError, AuditReport,
};
