//! SDE model specifications with structural certificates.
//!
//! A [`ModelSpec`] packages the coefficients of
//!
//! ```text
//!     dX(t) = b(t, X) dt + √ε σ(t, X) dB(t),    X(0) = x₀ ∈ ℝᵈ,  B ∈ ℝᵐ,
//! ```
//!
//! together with the two sampled hypotheses that replace global Lipschitz
//! bounds:
//!
//! * **Locally weak monotonicity** ([`MonotonicityBundle`]): for |x|, |y| ≤ R
//!   and |x − y| ≤ ε₀,
//!
//!   ```text
//!       2⟨x − y, b(s,x) − b(s,y)⟩ + ‖σ(s,x) − σ(s,y)‖²_HS ≤ g(s) · η_R(|x − y|²),
//!   ```
//!
//!   with η_R concave, increasing, vanishing at 0.
//!
//! * **Lyapunov drift condition** ([`LyapunovBundle`]): for a C² function
//!   V ≥ 0 and constants δ, η > 0,
//!
//!   ```text
//!       ⟨b, V_x⟩ + (δ/2) tr(V_xx σσᵀ) + |σᵀ V_x|² / (η V) ≤ f(s) (1 + γ(V)),
//!   ```
//!
//!   with γ increasing and ∫ ds/(1 + γ(s)) = ∞ (here realized by concrete
//!   moduli, see [`ModulusSpec`]); additionally tr(V_xx σσᵀ) ≥ 0.
//!
//! The left side of the drift condition is exposed as
//! [`eval_lyapunov_expression`]; the quotient term is 0 whenever the pairing
//! σᵀV_x vanishes identically at the point, and evaluation fails with
//! [`ModelError::SingularQuotient`] if V = 0 while the pairing does not
//! vanish.
//!
//! Moduli must also satisfy the scaling condition sup_s c·η(s)/η(cs) < ∞ for
//! each fixed c ∈ (0, 1]; that is audited numerically in [`crate::verify`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub type FieldFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
pub type WeightFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type RadiusModulusFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("unknown parameter `{param}` for model `{model}`")]
    UnknownParameter { model: String, param: String },
    #[error("parameter `{param}` = {value} out of range for model `{model}`: requires {constraint}")]
    ParameterOutOfRange {
        model: String,
        param: String,
        value: f64,
        constraint: &'static str,
    },
    #[error("model `{0}` carries no Lyapunov bundle")]
    MissingLyapunov(String),
    #[error("model `{0}` carries no monotonicity bundle")]
    MissingMonotonicity(String),
    #[error("Lyapunov quotient singular: V = 0 with non-vanishing diffusion pairing |sigma^T V_x| at the evaluated point")]
    SingularQuotient,
    #[error("initial state has dimension {got}, model dimension is {expected}")]
    BadX0Dimension { expected: usize, got: usize },
    #[error("initial state lies outside the model domain")]
    X0OutsideDomain,
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("state/noise dimensions must be at least 1")]
    BadDimension,
    #[error("monotonicity closeness radius eps0 must lie in (0, 1), got {0}")]
    BadEps0(f64),
}

/// State-space constraint enforced by projection after every Euler step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Unconstrained,
    /// Componentwise x_i ≥ 0 (population / compartment models).
    NonnegativeOrthant,
}

impl Domain {
    /// Project a state onto the domain (identity for `Unconstrained`).
    pub fn project(&self, x: &mut [f64]) {
        if let Domain::NonnegativeOrthant = self {
            for v in x.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Unconstrained => true,
            Domain::NonnegativeOrthant => x.iter().all(|v| *v >= 0.0),
        }
    }
}

/// Concrete modulus families for η_R and γ.
///
/// All are increasing and vanish at 0 except `XLogXPlusOne`, which is the
/// γ-style modulus s ↦ s·ln s + 1 (set to 1 on [0, 1] so it stays increasing
/// and positive).  `XLogInverse` is s ↦ c·s·ln(1/s), extended flatly by its
/// maximum value c/e beyond s = 1/e so it remains increasing and concave.
#[derive(Clone)]
pub enum ModulusSpec {
    Linear {
        slope: f64,
    },
    XLogInverse {
        scale: f64,
    },
    XLogXPlusOne,
    Custom {
        name: String,
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl ModulusSpec {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            ModulusSpec::Linear { slope } => slope * s,
            ModulusSpec::XLogInverse { scale } => {
                if s <= 0.0 {
                    0.0
                } else if s < std::f64::consts::E.recip() {
                    scale * s * (1.0 / s).ln()
                } else {
                    scale * std::f64::consts::E.recip()
                }
            }
            ModulusSpec::XLogXPlusOne => {
                if s <= 1.0 {
                    1.0
                } else {
                    s * s.ln() + 1.0
                }
            }
            ModulusSpec::Custom { eval, .. } => eval(s),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ModulusSpec::Linear { slope } => format!("linear({slope})"),
            ModulusSpec::XLogInverse { scale } => format!("xlog1overx({scale})"),
            ModulusSpec::XLogXPlusOne => "xlogx_plus1".to_string(),
            ModulusSpec::Custom { name, .. } => format!("custom({name})"),
        }
    }
}

impl fmt::Debug for ModulusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModulusSpec::{}", self.label())
    }
}

/// Lyapunov certificate: V with gradient/Hessian, constants δ, η, the time
/// weight f, and the modulus γ.
#[derive(Clone)]
pub struct LyapunovBundle {
    v: ScalarFn,
    v_grad: GradFn,
    v_hess: GradFn,
    pub delta: f64,
    pub eta: f64,
    f_weight: WeightFn,
    pub gamma: ModulusSpec,
}

impl LyapunovBundle {
    pub fn new(
        v: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        v_grad: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        v_hess: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        delta: f64,
        eta: f64,
        f_weight: impl Fn(f64) -> f64 + Send + Sync + 'static,
        gamma: ModulusSpec,
    ) -> Self {
        Self {
            v: Arc::new(v),
            v_grad: Arc::new(v_grad),
            v_hess: Arc::new(v_hess),
            delta,
            eta,
            f_weight: Arc::new(f_weight),
            gamma,
        }
    }

    pub fn v(&self, x: &[f64]) -> f64 {
        (self.v)(x)
    }

    /// Gradient V_x into `out` (length d).
    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        (self.v_grad)(x, out)
    }

    /// Hessian V_xx into `out` (length d·d, row-major).
    pub fn hess(&self, x: &[f64], out: &mut [f64]) {
        (self.v_hess)(x, out)
    }

    pub fn f_weight(&self, s: f64) -> f64 {
        (self.f_weight)(s)
    }
}

impl fmt::Debug for LyapunovBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LyapunovBundle")
            .field("delta", &self.delta)
            .field("eta", &self.eta)
            .field("gamma", &self.gamma)
            .finish_non_exhaustive()
    }
}

/// Locally-weak-monotonicity certificate: closeness radius ε₀, time weight g,
/// and the radius-indexed modulus family (R, s) ↦ η_R(s).
#[derive(Clone)]
pub struct MonotonicityBundle {
    pub eps0: f64,
    g_weight: WeightFn,
    eta_r: RadiusModulusFn,
}

impl MonotonicityBundle {
    pub fn new(
        eps0: f64,
        g_weight: impl Fn(f64) -> f64 + Send + Sync + 'static,
        eta_r: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, ModelError> {
        if !(eps0 > 0.0 && eps0 < 1.0) {
            return Err(ModelError::BadEps0(eps0));
        }
        Ok(Self {
            eps0,
            g_weight: Arc::new(g_weight),
            eta_r: Arc::new(eta_r),
        })
    }

    pub fn g_weight(&self, s: f64) -> f64 {
        (self.g_weight)(s)
    }

    /// η_R(s) for ball radius R and squared-distance argument s.
    pub fn eta_r(&self, r: f64, s: f64) -> f64 {
        (self.eta_r)(r, s)
    }
}

impl fmt::Debug for MonotonicityBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotonicityBundle")
            .field("eps0", &self.eps0)
            .finish_non_exhaustive()
    }
}

/// Full model: coefficients, dimensions, initial state, horizon, domain, and
/// optional structural certificates.
#[derive(Clone)]
pub struct ModelSpec {
    name: String,
    d: usize,
    m: usize,
    x0: Vec<f64>,
    horizon: f64,
    drift: FieldFn,
    diffusion: FieldFn,
    domain: Domain,
    lyapunov: Option<LyapunovBundle>,
    monotonicity: Option<MonotonicityBundle>,
    params: BTreeMap<String, f64>,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("d", &self.d)
            .field("m", &self.m)
            .field("x0", &self.x0)
            .field("horizon", &self.horizon)
            .field("domain", &self.domain)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl ModelSpec {
    /// Construct a bare model (unconstrained domain, no certificates).
    pub fn new(
        name: impl Into<String>,
        d: usize,
        m: usize,
        x0: Vec<f64>,
        horizon: f64,
        drift: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        diffusion: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Result<Self, ModelError> {
        if d == 0 || m == 0 {
            return Err(ModelError::BadDimension);
        }
        if x0.len() != d {
            return Err(ModelError::BadX0Dimension {
                expected: d,
                got: x0.len(),
            });
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(ModelError::BadHorizon(horizon));
        }
        Ok(Self {
            name: name.into(),
            d,
            m,
            x0,
            horizon,
            drift: Arc::new(drift),
            diffusion: Arc::new(diffusion),
            domain: Domain::Unconstrained,
            lyapunov: None,
            monotonicity: None,
            params: BTreeMap::new(),
        })
    }

    pub fn with_domain(mut self, domain: Domain) -> Result<Self, ModelError> {
        if !domain.contains(&self.x0) {
            return Err(ModelError::X0OutsideDomain);
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn with_lyapunov(mut self, bundle: LyapunovBundle) -> Self {
        self.lyapunov = Some(bundle);
        self
    }

    pub fn with_monotonicity(mut self, bundle: MonotonicityBundle) -> Self {
        self.monotonicity = Some(bundle);
        self
    }

    pub fn with_params(mut self, params: BTreeMap<String, f64>) -> Self {
        self.params = params;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self, ModelError> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(ModelError::BadHorizon(horizon));
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn with_x0(mut self, x0: Vec<f64>) -> Result<Self, ModelError> {
        if x0.len() != self.d {
            return Err(ModelError::BadX0Dimension {
                expected: self.d,
                got: x0.len(),
            });
        }
        if !self.domain.contains(&x0) {
            return Err(ModelError::X0OutsideDomain);
        }
        self.x0 = x0;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn noise_dim(&self) -> usize {
        self.m
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn lyapunov(&self) -> Option<&LyapunovBundle> {
        self.lyapunov.as_ref()
    }

    pub fn monotonicity(&self) -> Option<&MonotonicityBundle> {
        self.monotonicity.as_ref()
    }

    /// Evaluate b(t, x) into `out` (length d).
    pub fn drift(&self, t: f64, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.d);
        debug_assert_eq!(out.len(), self.d);
        (self.drift)(t, x, out)
    }

    /// Evaluate σ(t, x) into `out` (length d·m, row-major: out[i·m + j]).
    pub fn diffusion(&self, t: f64, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.d);
        debug_assert_eq!(out.len(), self.d * self.m);
        (self.diffusion)(t, x, out)
    }

    /// Allocating convenience for tests and audits.
    pub fn drift_vec(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        self.drift(t, x, &mut out);
        out
    }

    /// Allocating convenience for tests and audits (row-major d×m).
    pub fn diffusion_mat(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d * self.m];
        self.diffusion(t, x, &mut out);
        out
    }
}

/// Left side of the Lyapunov drift condition at (t, x):
///
/// ```text
///     ⟨b, V_x⟩ + (δ/2)·tr(V_xx σσᵀ) + |σᵀV_x|² / (η V).
/// ```
///
/// The quotient is taken as 0 when σᵀV_x = 0 exactly (including V = 0 points
/// where the pairing vanishes, e.g. equilibria); if V = 0 but the pairing is
/// nonzero the expression is singular and an error is returned.
pub fn eval_lyapunov_expression(model: &ModelSpec, t: f64, x: &[f64]) -> Result<f64, ModelError> {
    let lb = model
        .lyapunov()
        .ok_or_else(|| ModelError::MissingLyapunov(model.name().to_string()))?;
    let d = model.dim();
    let m = model.noise_dim();
    let mut b = vec![0.0; d];
    model.drift(t, x, &mut b);
    let mut sig = vec![0.0; d * m];
    model.diffusion(t, x, &mut sig);
    let mut vx = vec![0.0; d];
    lb.grad(x, &mut vx);
    let mut hess = vec![0.0; d * d];
    lb.hess(x, &mut hess);

    let mut drift_term = 0.0;
    for i in 0..d {
        drift_term += b[i] * vx[i];
    }

    let trace = trace_hess_sigma(&hess, &sig, d, m);
    let trace_term = 0.5 * lb.delta * trace;

    // |σᵀ V_x|² over noise columns.
    let mut pairing_sq = 0.0;
    for c in 0..m {
        let mut w = 0.0;
        for i in 0..d {
            w += sig[i * m + c] * vx[i];
        }
        pairing_sq += w * w;
    }
    let v = lb.v(x);
    let quotient = if pairing_sq == 0.0 {
        0.0
    } else if v > 0.0 {
        pairing_sq / (lb.eta * v)
    } else {
        return Err(ModelError::SingularQuotient);
    };

    Ok(drift_term + trace_term + quotient)
}

/// tr(V_xx σσᵀ) at (t, x) — must be nonnegative under the drift condition.
pub fn lyapunov_trace(model: &ModelSpec, t: f64, x: &[f64]) -> Result<f64, ModelError> {
    let lb = model
        .lyapunov()
        .ok_or_else(|| ModelError::MissingLyapunov(model.name().to_string()))?;
    let d = model.dim();
    let m = model.noise_dim();
    let mut sig = vec![0.0; d * m];
    model.diffusion(t, x, &mut sig);
    let mut hess = vec![0.0; d * d];
    lb.hess(x, &mut hess);
    Ok(trace_hess_sigma(&hess, &sig, d, m))
}

/// Right side f(t)·(1 + γ(V(x))) of the drift condition.
pub fn lyapunov_rhs(model: &ModelSpec, t: f64, x: &[f64]) -> Result<f64, ModelError> {
    let lb = model
        .lyapunov()
        .ok_or_else(|| ModelError::MissingLyapunov(model.name().to_string()))?;
    Ok(lb.f_weight(t) * (1.0 + lb.gamma.eval(lb.v(x))))
}

/// tr(H σσᵀ) = Σ_c σ_cᵀ H σ_c over noise columns σ_c.
fn trace_hess_sigma(hess: &[f64], sig: &[f64], d: usize, m: usize) -> f64 {
    let mut trace = 0.0;
    for c in 0..m {
        for i in 0..d {
            let si = sig[i * m + c];
            if si != 0.0 {
                let mut row = 0.0;
                for j in 0..d {
                    row += hess[i * d + j] * sig[j * m + c];
                }
                trace += si * row;
            }
        }
    }
    trace
}
