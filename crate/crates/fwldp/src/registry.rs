//! Registry of worked example models.
//!
//! Five non-Lipschitz examples exercise the structural hypotheses:
//!
//! * `holder13` — dX = −X^{1/3} dt + √ε X^{2/3} dB: Hölder-1/3 drift and
//!   Hölder-2/3 diffusion; the Lyapunov expression with V = x², δ = 1, η = 4
//!   vanishes identically, and 2(x−y)(b(x)−b(y)) + (σ(x)−σ(y))² =
//!   −(x^{1/3}−y^{1/3})²(x^{2/3}+y^{2/3}) ≤ 0.
//! * `power_drift` — dX = −X|X|^{−α} dt + √ε σ₀ dB, α ∈ (0,1): drift singular
//!   at 0 (capped below |x| = 10⁻⁸, with b(0) = 0) yet monotone, since
//!   x ↦ sign(x)|x|^{1−α} is increasing.
//! * `duffing_vdp` — Duffing–van der Pol oscillator with state-dependent noise
//!   g(x₁) = (η₀ + η₁x₁⁴)^{1/2} on the velocity component; V = x₁⁴/2 + α₁x₁²
//!   + x₂² gives the drift bound with constant K = 5η₀ + 10η₁ + 2α₂.
//! * `sir` — stochastic SIR epidemic with anti-correlated transmission noise
//!   ±βx₁x₂ on the first two compartments; V = (x₁+x₂−1)² has identically
//!   vanishing diffusion pairing and satisfies the drift bound with the
//!   constant weight γ/2.
//! * `lv3` — 3-species stochastic Lotka–Volterra (Stratonovich noise, so the
//!   Itô drift carries +σ²yᵢ/2); V = |y|² with γ(s) = s.  With the registry
//!   defaults (r = 1/2, σ = 1, f ≡ 4) the sampled Lyapunov audit passes
//!   exactly when min_i a_ii ≥ σ²/2, the coexistence-type threshold.
//!
//! Two Lipschitz controls admit closed-form rate functions for oracle tests:
//!
//! * `brownian` — b ≡ 0, σ ≡ 1 (Schilder regime: I(z) = (z−x₀)²/2T for the
//!   endpoint problem).
//! * `ou` — b = −a x, σ ≡ 1 (linear-quadratic: I(z) = a z²/(1 − e^{−2aT})
//!   from x₀ = 0).
//!
//! All models use horizon T = 1 and m = 1 noise by default; dynamics
//! parameters are overridable by name through [`build_model`].

use crate::model::{
    Domain, LyapunovBundle, ModelError, ModelSpec, ModulusSpec, MonotonicityBundle,
};
use std::collections::BTreeMap;

/// Default closeness radius ε₀ for the monotonicity certificates.
const DEFAULT_EPS0: f64 = 0.5;
/// |x| below which the power-drift factor |x|^{−α} is frozen.
const POWER_DRIFT_CAP: f64 = 1e-8;

#[derive(Clone, Copy)]
enum Check {
    Positive,
    NonNegative,
    OpenUnitInterval,
    Any,
}

impl Check {
    fn admits(&self, v: f64) -> bool {
        v.is_finite()
            && match self {
                Check::Positive => v > 0.0,
                Check::NonNegative => v >= 0.0,
                Check::OpenUnitInterval => v > 0.0 && v < 1.0,
                Check::Any => true,
            }
    }

    fn describe(&self) -> &'static str {
        match self {
            Check::Positive => "a finite value > 0",
            Check::NonNegative => "a finite value >= 0",
            Check::OpenUnitInterval => "a finite value in (0, 1)",
            Check::Any => "a finite value",
        }
    }
}

struct ParamDef {
    name: &'static str,
    default: f64,
    check: Check,
}

const fn p(name: &'static str, default: f64, check: Check) -> ParamDef {
    ParamDef {
        name,
        default,
        check,
    }
}

fn resolve_params(
    model: &str,
    defs: &[ParamDef],
    overrides: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>, ModelError> {
    let mut out = BTreeMap::new();
    for d in defs {
        out.insert(d.name.to_string(), d.default);
    }
    for (key, value) in overrides {
        let def = defs.iter().find(|d| d.name == key).ok_or_else(|| {
            ModelError::UnknownParameter {
                model: model.to_string(),
                param: key.clone(),
            }
        })?;
        if !def.check.admits(*value) {
            return Err(ModelError::ParameterOutOfRange {
                model: model.to_string(),
                param: key.clone(),
                value: *value,
                constraint: def.check.describe(),
            });
        }
        out.insert(key.clone(), *value);
    }
    Ok(out)
}

/// Names of all registered models.
pub fn registered_models() -> &'static [&'static str] {
    &[
        "brownian",
        "ou",
        "holder13",
        "power_drift",
        "duffing_vdp",
        "sir",
        "lv3",
    ]
}

/// Build a registered model with named parameter overrides.
///
/// The returned spec is deterministic: two builds with equal arguments give
/// pointwise-identical coefficient functions.
pub fn build_model(
    name: &str,
    overrides: &BTreeMap<String, f64>,
) -> Result<ModelSpec, ModelError> {
    match name {
        "brownian" => build_brownian(overrides),
        "ou" => build_ou(overrides),
        "holder13" => build_holder13(overrides),
        "power_drift" => build_power_drift(overrides),
        "duffing_vdp" => build_duffing_vdp(overrides),
        "sir" => build_sir(overrides),
        "lv3" => build_lv3(overrides),
        other => Err(ModelError::UnknownModel(other.to_string())),
    }
}

/// s ↦ s·ln(1/s) extended flatly by its maximum 1/e beyond s = 1/e.
fn xlog_inverse(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s < std::f64::consts::E.recip() {
        s * (1.0 / s).ln()
    } else {
        std::f64::consts::E.recip()
    }
}

#[allow(clippy::type_complexity)]
fn quadratic_v_1d() -> (
    impl Fn(&[f64]) -> f64 + Send + Sync,
    impl Fn(&[f64], &mut [f64]) + Send + Sync,
    impl Fn(&[f64], &mut [f64]) + Send + Sync,
) {
    (
        |x: &[f64]| x[0] * x[0],
        |x: &[f64], g: &mut [f64]| g[0] = 2.0 * x[0],
        |_x: &[f64], h: &mut [f64]| h[0] = 2.0,
    )
}

fn build_brownian(overrides: &BTreeMap<String, f64>) -> Result<ModelSpec, ModelError> {
    let params = resolve_params("brownian", &[p("x0", 0.0, Check::Any)], overrides)?;
    let x0 = params["x0"];
    let (v, vg, vh) = quadratic_v_1d();
    Ok(ModelSpec::new(
        "brownian",
        1,
        1,
        vec![x0],
        1.0,
        |_t, _x, out| out[0] = 0.0,
        |_t, _x, out| out[0] = 1.0,
    )?
    .with_params(params)
    .with_lyapunov(LyapunovBundle::new(
        v,
        vg,
        vh,
        1.0,
        1.0,
        // ⟨b,V_x⟩ + (δ/2)·2 + 4x²/(η x²) ≤ 1 + 4 = 5.
        |_s| 5.0,
        ModulusSpec::Linear { slope: 1.0 },
    ))
    .with_monotonicity(MonotonicityBundle::new(
        DEFAULT_EPS0,
        |_s| 1.0,
        // Constant coefficients: the raw margin is identically 0.
        |_r, s| s,
    )?))
}

fn build_ou(overrides: &BTreeMap<String, f64>) -> Result<ModelSpec, ModelError> {
    let params = resolve_params(
        "ou",
        &[p("a", 1.0, Check::Positive), p("x0", 0.0, Check::Any)],
        overrides,
    )?;
    let a = params["a"];
    let x0 = params["x0"];
    let (v, vg, vh) = quadratic_v_1d();
    Ok(ModelSpec::new(
        "ou",
        1,
        1,
        vec![x0],
        1.0,
        move |_t, x, out| out[0] = -a * x[0],
        |_t, _x, out| out[0] = 1.0,
    )?
    .with_params(params)
    .with_lyapunov(LyapunovBundle::new(
        v,
        vg,
        vh,
        1.0,
        1.0,
        // −2a x² + 1 + 4 ≤ 5.
        |_s| 5.0,
        ModulusSpec::Linear { slope: 1.0 },
    ))
    .with_monotonicity(MonotonicityBundle::new(
        DEFAULT_EPS0,
        |_s| 1.0,
        // Raw margin −2a|x−y|² ≤ 0.
        |_r, s| s,
    )?))
}

fn build_holder13(overrides: &BTreeMap<String, f64>) -> Result<ModelSpec, ModelError> {
    let params = resolve_params("holder13", &[p("x0", 0.0, Check::Any)], overrides)?;
    let x0 = params["x0"];
    let (v, vg, vh) = quadratic_v_1d();
    Ok(ModelSpec::new(
        "holder13",
        1,
        1,
        vec![x0],
        1.0,
        |_t, x, out| out[0] = -x[0].cbrt(),
        |_t, x, out| {
            let c = x[0].cbrt();
            out[0] = c * c;
        },
    )?
    .with_params(params)
    .with_lyapunov(LyapunovBundle::new(
        v,
        vg,
        vh,
        1.0,
        // η = 4 makes the three terms cancel exactly:
        // −2|x|^{4/3} + |x|^{4/3} + (2x·x^{2/3})²/(4x²) = 0.
        4.0,
        |_s| 1.0,
        ModulusSpec::Linear { slope: 1.0 },
    ))
    .with_monotonicity(MonotonicityBundle::new(
        DEFAULT_EPS0,
        |_s| 1.0,
        // η_R(s) = R·s·ln(1/s): the raw margin is ≤ 0 outright, and this
        // modulus family satisfies the per-c scaling condition.
        |r, s| r * xlog_inverse(s),
    )?))
}

fn build_power_drift(overrides: &BTreeMap<String, f64>) -> Result<ModelSpec, ModelError> {
    let params = resolve_params(
        "power_drift",
        &[
            p("alpha", 0.5, Check::OpenUnitInterval),
            p("sigma0", 1.0, Check::NonNegative),
            p("x0", 1.0, Check::Any),
        ],
        overrides,
    )?;
    let alpha = params["alpha"];
    let sigma0 = params["sigma0"];
    let x0 = params["x0"];
    let capped_factor = POWER_DRIFT_CAP.powf(-alpha);
    let (v, vg, vh) = quadratic_v_1d();
    Ok(ModelSpec::new(
        "power_drift",
        1,
        1,
        vec![x0],
        1.0,
        move |_t, x, out| {
            let ax = x[0].abs();
            let factor = if ax < POWER_DRIFT_CAP {
                capped_factor
            } else {
                ax.powf(-alpha)
            };
            out[0] = -x[0] * factor;
        },
        move |_t, _x, out| out[0] = sigma0,
    )?
    .with_params(params)
    .with_lyapunov(LyapunovBundle::new(
        v,
        vg,
        vh,
        1.0,
        1.0,
        // 2x·b ≤ 0, so LHS ≤ (δ + 4/η)σ₀² = 5σ₀².
        move |_s| 5.0 * sigma0 * sigma0,
        ModulusSpec::Linear { slope: 1.0 },
    ))
    .with_monotonicity(MonotonicityBundle::new(
        DEFAULT_EPS0,
        |_s| 1.0,
        // sign(x)|x|^{1−α} is increasing and σ is constant: raw margin ≤ 0.
        |_r, s| s,
    )?))
}

fn build_duffing_vdp(overrides: &BTreeMap<String, f64>) -> Result<ModelSpec, ModelError> {
    let params = resolve_params(
        "duffing_vdp",
        &[
            p("alpha1", 1.0, Check::Positive),
            p("alpha2", 1.0, Check::Positive),
            p("alpha3", 1.0, Check::Positive),
            p("eta0", 1.0, Check::Positive),
            p("eta1", 1.0, Check::Positive),
        ],
        overrides,
    )?;
    let (a1, a2, a3) = (params["alpha1"], params["alpha2"], params["alpha3"]);
    let (e0, e1) = (params["eta0"], params["eta1"]);
    // Drift bound constant from the Lyapunov chain: K = 5η₀ + 10η₁ + 2α₂.
    let k_const = 5.0 * e0 + 10.0 * e1 + 2.0 * a2;
    Ok(ModelSpec::new(
        "duffing_vdp",
        2,
        1,
        vec![0.0, 0.0],
        1.0,
        move |_t, x, out| {
            out[0] = x[1];
            out[1] = a2 * x[1] - a1 * x[0] - a3 * x[0] * x[0] * x[1] - x[0] * x[0] * x[0];
        },
        move |_t, x, out| {
            out[0] = 0.0;
            let x1sq = x[0] * x[0];
            out[1] = (e0 + e1 * x1sq * x1sq).sqrt();
        },
    )?
    .with_params(params)
    .with_lyapunov(LyapunovBundle::new(
        move |x: &[f64]| 0.5 * x[0].powi(4) + a1 * x[0] * x[0] + x[1] * x[1],
        move |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0].powi(3) + 2.0 * a1 * x[0];
            g[1] = 2.0 * x[1];
        },
        move |x: &[f64], h: &mut [f64]| {
            h[0] = 6.0 * x[0] * x[0] + 2.0 * a1;
            h[1] = 0.0;
            h[2] = 0.0;
            h[3] = 2.0;
        },
        1.0,
        1.0,
        move |_s| k_const,
        ModulusSpec::Linear { slope: 1.0 },
    ))
    .with_monotonicity(MonotonicityBundle::new(
        DEFAULT_EPS0,
        |_s| 1.0,
        // Drift Jacobian entries on the ball of radius R are bounded by
        // 1 + α₁ + α₂ + 3(1+α₃)R², and g is 2√η₁·R-Lipschitz there.
        move |r, s| (2.0 * (1.0 + a1 + a2 + 3.0 * (1.0 + a3) * r * r) + 4.0 * e1 * r * r) * s,
    )?))
}

fn build_sir(overrides: &BTreeMap<String, f64>) -> Result<ModelSpec, ModelError> {
    let params = resolve_params(
        "sir",
        &[
            p("alpha", 1.0, Check::Positive),
            p("beta", 1.0, Check::Positive),
            p("gamma", 1.0, Check::Positive),
            p("kappa", 1.0, Check::Positive),
        ],
        overrides,
    )?;
    let (alpha, beta, gamma, kappa) = (
        params["alpha"],
        params["beta"],
        params["gamma"],
        params["kappa"],
    );
    Ok(ModelSpec::new(
        "sir",
        3,
        1,
        vec![0.9, 0.1, 0.0],
        1.0,
        move |_t, x, out| {
            let infection = alpha * x[0] * x[1];
            out[0] = -infection - kappa * x[0] + kappa;
            out[1] = infection - (gamma + kappa) * x[1];
            out[2] = gamma * x[1] - kappa * x[2];
        },
        move |_t, x, out| {
            let w = beta * x[0] * x[1];
            out[0] = -w;
            out[1] = w;
            out[2] = 0.0;
        },
    )?
    .with_domain(Domain::NonnegativeOrthant)?
    .with_params(params)
    .with_lyapunov(LyapunovBundle::new(
        |x: &[f64]| {
            let u = x[0] + x[1] - 1.0;
            u * u
        },
        |x: &[f64], g: &mut [f64]| {
            let u = x[0] + x[1] - 1.0;
            g[0] = 2.0 * u;
            g[1] = 2.0 * u;
            g[2] = 0.0;
        },
        |_x: &[f64], h: &mut [f64]| {
            h.copy_from_slice(&[2.0, 2.0, 0.0, 2.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        },
        1.0,
        1.0,
        // The diffusion pairing σᵀV_x = 2u(−w + w) vanishes identically, and
        // ⟨b, V_x⟩ = −2κu² − 2γx₂u ≤ γ/2 on the whole orthant.
        move |_s| gamma / 2.0,
        ModulusSpec::Linear { slope: 1.0 },
    ))
    .with_monotonicity(MonotonicityBundle::new(
        DEFAULT_EPS0,
        |_s| 1.0,
        // Drift entries have total derivative mass ≤ 4αR + 2γ + 3κ on the
        // ball; |σ(x)−σ(y)|² ≤ 4β²R²|x−y|².
        move |r, s| (2.0 * (4.0 * alpha * r + 2.0 * gamma + 3.0 * kappa) + 4.0 * beta * beta * r * r) * s,
    )?))
}

fn build_lv3(overrides: &BTreeMap<String, f64>) -> Result<ModelSpec, ModelError> {
    let params = resolve_params(
        "lv3",
        &[
            p("r", 0.5, Check::Positive),
            p("sigma", 1.0, Check::NonNegative),
            p("a11", 1.0, Check::Positive),
            p("a12", 1.0, Check::Positive),
            p("a13", 1.0, Check::Positive),
            p("a21", 1.0, Check::Positive),
            p("a22", 1.0, Check::Positive),
            p("a23", 1.0, Check::Positive),
            p("a31", 1.0, Check::Positive),
            p("a32", 1.0, Check::Positive),
            p("a33", 1.0, Check::Positive),
        ],
        overrides,
    )?;
    let r = params["r"];
    let sigma = params["sigma"];
    let a: [[f64; 3]; 3] = [
        [params["a11"], params["a12"], params["a13"]],
        [params["a21"], params["a22"], params["a23"]],
        [params["a31"], params["a32"], params["a33"]],
    ];
    let a_max = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(*v));
    let half_sig2 = 0.5 * sigma * sigma;
    Ok(ModelSpec::new(
        "lv3",
        3,
        1,
        vec![0.5, 0.5, 0.5],
        1.0,
        move |_t, y, out| {
            // Itô drift of the Stratonovich system: y_i(r − Σ_j a_ij y_j) + σ²y_i/2.
            for i in 0..3 {
                let mut interaction = 0.0;
                for j in 0..3 {
                    interaction += a[i][j] * y[j];
                }
                out[i] = y[i] * (r - interaction) + half_sig2 * y[i];
            }
        },
        move |_t, y, out| {
            out[0] = sigma * y[0];
            out[1] = sigma * y[1];
            out[2] = sigma * y[2];
        },
    )?
    .with_domain(Domain::NonnegativeOrthant)?
    .with_params(params)
    .with_lyapunov(LyapunovBundle::new(
        |y: &[f64]| y[0] * y[0] + y[1] * y[1] + y[2] * y[2],
        |y: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * y[0];
            g[1] = 2.0 * y[1];
            g[2] = 2.0 * y[2];
        },
        |_y: &[f64], h: &mut [f64]| {
            h.copy_from_slice(&[2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 2.0]);
        },
        1.0,
        1.0,
        // With f ≡ 4 and γ(s) = s, the sampled bound on the orthant holds
        // exactly when min_i a_ii ≥ σ²/2 (worst case on the axes).
        |_s| 4.0,
        ModulusSpec::Linear { slope: 1.0 },
    ))
    .with_monotonicity(MonotonicityBundle::new(
        DEFAULT_EPS0,
        |_s| 1.0,
        move |rad, s| {
            (2.0 * (3.0 * (r + half_sig2) + 18.0 * a_max * rad) + sigma * sigma) * s
        },
    )?))
}
