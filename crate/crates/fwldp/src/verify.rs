//! Sampled audits of the structural assumptions.
//!
//! Each audit evaluates a *margin* = (left side) − (right side) of one
//! hypothesis over a deterministic low-discrepancy point set and reports the
//! worst (largest) value together with the point attaining it, so every
//! verdict is a reproducible certificate: re-evaluating the margin at
//! `worst_point` recovers `worst_margin`.
//!
//! * [`audit_integrability`] — composite-Simpson quadrature of
//!   s ↦ sup_{|x| ≤ R} (|b(s,x)| + ‖σ(s,x)‖²_HS); a finite value passes.
//! * [`audit_monotonicity`] — margin 2⟨x−y, Δb⟩ + ‖Δσ‖²_HS − g(s)·η_R(|x−y|²)
//!   over quasi-random admissible pairs with |x|∨|y| ≤ R, |x−y| ≤ ε₀.
//! * [`audit_lyapunov`] — margin (Lyapunov expression) − f(s)(1+γ(V)), plus a
//!   second report for tr(V_xx σσᵀ) ≥ 0.  Points where the quotient is
//!   singular are excluded and counted.
//! * [`audit_ratio`] — the modulus scaling condition sup_s c·η(s)/η(cs) < ∞
//!   per fixed c ∈ (0, 1].  Finiteness of a sup cannot be observed from one
//!   grid, so the audit is *finite-behaved*: the per-c grid sup must be stable
//!   (< 1% relative growth) under 2× and 4× s-grid refinement, and η(cs) must
//!   stay positive.  The overall grid sup is reported as the audit statistic.
//!
//! Sampling is a nested Weyl (Kronecker) sequence — point i of the n-point
//! audit equals point i of the 2n-point audit, so enlarging a sample can only
//! raise the reported worst margin — with a seed-derived Cranley–Patterson
//! shift.  For orthant-constrained models the sampler mixes interior points
//! with face, axis, and sphere strata: boundary slivers (e.g. the axes of the
//! Lotka–Volterra cone) are exactly where these hypotheses fail first, and a
//! plain equidistributed sequence would place no points there.

use crate::model::{Domain, ModelError, ModelSpec, ModulusSpec};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("model `{0}` carries no monotonicity bundle")]
    MissingMonotonicity(String),
    #[error("model `{0}` carries no Lyapunov bundle")]
    MissingLyapunov(String),
    #[error("audit region admitted no sample points")]
    EmptyRegion,
    #[error("region radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("audit needs a positive sample count")]
    NoSamples,
    #[error("ratio audit needs n_c >= 2 and n_s >= 8")]
    BadResolution,
    #[error("modulus domain cap must be positive and finite, got {0}")]
    BadDomainCap(f64),
    #[error("Lyapunov quotient singular at the sampled point")]
    SingularPoint,
}

/// Which hypothesis a report audits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AssumptionTag {
    Integrability,
    Monotonicity,
    Lyapunov,
    TraceNonneg,
    RatioEta,
    RatioGamma,
}

impl AssumptionTag {
    pub fn label(&self) -> &'static str {
        match self {
            AssumptionTag::Integrability => "integrability",
            AssumptionTag::Monotonicity => "monotonicity",
            AssumptionTag::Lyapunov => "lyapunov",
            AssumptionTag::TraceNonneg => "trace_nonneg",
            AssumptionTag::RatioEta => "ratio_eta",
            AssumptionTag::RatioGamma => "ratio_gamma",
        }
    }
}

/// Outcome of one sampled audit.
///
/// `passed` always equals `worst_margin <= tolerance` (NaN margins fail).
/// `worst_point` stores the coordinates attaining the worst margin:
/// `[s, x…]` for Lyapunov-type audits, `[s, x…, y…]` for monotonicity,
/// `[c, s]` for ratio audits.  `extremum` carries an audit-specific statistic
/// (the quadrature value for integrability, the grid sup for ratio audits).
#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub assumption: AssumptionTag,
    pub samples: usize,
    pub worst_margin: f64,
    pub worst_point: Vec<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub excluded: usize,
    pub extremum: Option<f64>,
}

impl AuditReport {
    fn finish(
        assumption: AssumptionTag,
        samples: usize,
        worst_margin: f64,
        worst_point: Vec<f64>,
        tolerance: f64,
        excluded: usize,
        extremum: Option<f64>,
    ) -> Self {
        Self {
            assumption,
            samples,
            worst_margin,
            worst_point,
            tolerance,
            passed: worst_margin <= tolerance,
            excluded,
            extremum,
        }
    }
}

// ---------------------------------------------------------------------------
// Deterministic low-discrepancy sampling
// ---------------------------------------------------------------------------

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// Additive Weyl sequence with irrational strides √p mod 1 and a seed-derived
/// Cranley–Patterson shift.  Nested by construction: point i is a pure
/// function of (seed, i).
pub(crate) struct WeylSequence {
    alphas: Vec<f64>,
    shifts: Vec<f64>,
}

impl WeylSequence {
    pub(crate) fn new(dims: usize, seed: u64) -> Self {
        const PRIMES: [f64; 12] = [
            2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0,
        ];
        assert!(dims <= PRIMES.len(), "Weyl sampler supports up to 12 dimensions");
        let mut state = seed ^ 0xD1B54A32D192ED03;
        let shifts = (0..dims)
            .map(|_| splitmix64(&mut state) as f64 / u64::MAX as f64)
            .collect();
        let alphas = PRIMES[..dims].iter().map(|p| frac(p.sqrt())).collect();
        Self { alphas, shifts }
    }

    pub(crate) fn point(&self, index: u64, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = frac(self.alphas[j] * (index + 1) as f64 + self.shifts[j]);
        }
    }
}

/// Largest step s ∈ [0, 1] with |x + s·(y − x)| ≤ radius; x must satisfy
/// |x| ≤ radius.  Used to pull sampled points back into the audit ball.
fn shrink_to_ball(x: &[f64], y: &mut [f64], radius: f64) {
    let norm_sq: f64 = y.iter().map(|v| v * v).sum();
    if norm_sq <= radius * radius {
        return;
    }
    let mut a = 0.0;
    let mut b = 0.0;
    let mut c = -(radius * radius);
    for i in 0..x.len() {
        let w = y[i] - x[i];
        a += w * w;
        b += 2.0 * x[i] * w;
        c += x[i] * x[i];
    }
    if a == 0.0 {
        return;
    }
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let s = ((-b + disc.sqrt()) / (2.0 * a)).clamp(0.0, 1.0);
    for i in 0..y.len() {
        y[i] = x[i] + s * (y[i] - x[i]);
    }
}

/// One spatial sample for counter `i`, mixing interior, face, axis, and
/// sphere strata.  Returns `None` when the raw point falls outside the ball
/// (the counter still advances, preserving nestedness).
fn stratified_point(
    domain: Domain,
    d: usize,
    radius: f64,
    i: u64,
    u: &[f64],
) -> Option<Vec<f64>> {
    debug_assert_eq!(u.len(), d);
    let orthant = matches!(domain, Domain::NonnegativeOrthant);
    let map_box = |uj: f64| {
        if orthant {
            uj * radius
        } else {
            (2.0 * uj - 1.0) * radius
        }
    };

    if i % 16 == 1 {
        // Sphere stratum: |x| = radius exactly (up to normalization rounding).
        let mut dir: Vec<f64> = u
            .iter()
            .map(|uj| if orthant { *uj } else { 2.0 * uj - 1.0 })
            .collect();
        let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            dir[0] = 1.0;
        } else {
            for v in dir.iter_mut() {
                *v /= norm;
            }
        }
        for v in dir.iter_mut() {
            *v *= radius;
        }
        return Some(dir);
    }
    if i % 16 == 9 {
        // Axis stratum: t·e_j, t ∈ (0, radius].
        let j = ((i / 16) % d as u64) as usize;
        let sign = if orthant || (i / 16 / d as u64).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        let mut x = vec![0.0; d];
        x[j] = sign * u[0].max(f64::MIN_POSITIVE) * radius;
        return Some(x);
    }
    let mut x: Vec<f64> = u.iter().map(|uj| map_box(*uj)).collect();
    if orthant && d > 1 && i % 4 == 2 {
        // Face stratum: zero out a nonempty proper-or-full subset of coordinates.
        let mask = 1 + (i / 4) % ((1u64 << d) - 1);
        for (j, v) in x.iter_mut().enumerate() {
            if mask & (1 << j) != 0 {
                *v = 0.0;
            }
        }
    }
    let norm_sq: f64 = x.iter().map(|v| v * v).sum();
    if norm_sq > radius * radius {
        return None;
    }
    Some(x)
}

/// Deterministic audit points (s, x) with s ∈ [0, T] and x in the model's
/// domain intersected with the ball of radius `radius`, boundary strata
/// included.  Nested: the first n points of a longer run coincide.
pub fn region_samples(
    model: &ModelSpec,
    radius: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<(f64, Vec<f64>)>, AuditError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(AuditError::BadRadius(radius));
    }
    if n == 0 {
        return Err(AuditError::NoSamples);
    }
    let d = model.dim();
    let seq = WeylSequence::new(1 + d, seed);
    let mut buf = vec![0.0; 1 + d];
    let mut out = Vec::with_capacity(n);
    let mut i = 0u64;
    let attempts = 64 * n as u64 + 1024;
    while out.len() < n && i < attempts {
        seq.point(i, &mut buf);
        let s = buf[0] * model.horizon();
        if let Some(x) = stratified_point(model.domain(), d, radius, i, &buf[1..]) {
            out.push((s, x));
        }
        i += 1;
    }
    if out.is_empty() {
        return Err(AuditError::EmptyRegion);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Margin functions (re-evaluation entry points)
// ---------------------------------------------------------------------------

/// Monotonicity margin at (s, x, y) for the ball radius `region_radius`:
/// 2⟨x−y, b(s,x)−b(s,y)⟩ + ‖σ(s,x)−σ(s,y)‖²_HS − g(s)·η_R(|x−y|²).
pub fn monotonicity_margin(
    model: &ModelSpec,
    region_radius: f64,
    s: f64,
    x: &[f64],
    y: &[f64],
) -> Result<f64, AuditError> {
    let bundle = model
        .monotonicity()
        .ok_or_else(|| AuditError::MissingMonotonicity(model.name().to_string()))?;
    let d = model.dim();
    let m = model.noise_dim();
    let bx = model.drift_vec(s, x);
    let by = model.drift_vec(s, y);
    let sx = model.diffusion_mat(s, x);
    let sy = model.diffusion_mat(s, y);
    let mut pairing = 0.0;
    let mut dist_sq = 0.0;
    for i in 0..d {
        let dx = x[i] - y[i];
        pairing += dx * (bx[i] - by[i]);
        dist_sq += dx * dx;
    }
    let mut sig_sq = 0.0;
    for i in 0..d * m {
        let ds = sx[i] - sy[i];
        sig_sq += ds * ds;
    }
    Ok(2.0 * pairing + sig_sq - bundle.g_weight(s) * bundle.eta_r(region_radius, dist_sq))
}

/// Lyapunov margin at (s, x): (drift expression) − f(s)(1 + γ(V(x))).
pub fn lyapunov_margin(model: &ModelSpec, s: f64, x: &[f64]) -> Result<f64, AuditError> {
    let lhs = crate::model::eval_lyapunov_expression(model, s, x).map_err(map_model_err)?;
    let rhs = crate::model::lyapunov_rhs(model, s, x).map_err(map_model_err)?;
    Ok(lhs - rhs)
}

/// Trace margin at (s, x): −tr(V_xx σσᵀ); ≤ 0 means the trace is nonnegative.
pub fn trace_margin(model: &ModelSpec, s: f64, x: &[f64]) -> Result<f64, AuditError> {
    Ok(-crate::model::lyapunov_trace(model, s, x).map_err(map_model_err)?)
}

fn map_model_err(e: ModelError) -> AuditError {
    match e {
        ModelError::SingularQuotient => AuditError::SingularPoint,
        ModelError::MissingLyapunov(name) => AuditError::MissingLyapunov(name),
        ModelError::MissingMonotonicity(name) => AuditError::MissingMonotonicity(name),
        // Remaining variants cannot arise from pointwise evaluation.
        _ => AuditError::SingularPoint,
    }
}

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

/// Audit the locally-weak-monotonicity bound over `n_pairs` admissible pairs.
pub fn audit_monotonicity(
    model: &ModelSpec,
    region_radius: f64,
    n_pairs: usize,
    seed: u64,
    tolerance: f64,
) -> Result<AuditReport, AuditError> {
    let bundle = model
        .monotonicity()
        .ok_or_else(|| AuditError::MissingMonotonicity(model.name().to_string()))?;
    if !(region_radius.is_finite() && region_radius > 0.0) {
        return Err(AuditError::BadRadius(region_radius));
    }
    if n_pairs == 0 {
        return Err(AuditError::NoSamples);
    }
    let eps0 = bundle.eps0;
    let d = model.dim();
    let seq = WeylSequence::new(2 + 2 * d, seed);
    let mut buf = vec![0.0; 2 + 2 * d];
    let mut worst = f64::NEG_INFINITY;
    let mut worst_point = Vec::new();
    let mut accepted = 0usize;
    let mut i = 0u64;
    let attempts = 64 * n_pairs as u64 + 1024;
    while accepted < n_pairs && i < attempts {
        seq.point(i, &mut buf);
        let s = buf[0] * model.horizon();
        let x = match stratified_point(model.domain(), d, region_radius, i, &buf[2..2 + d]) {
            Some(x) => x,
            None => {
                i += 1;
                continue;
            }
        };
        // Offset direction and step |y − x| = ρ ≤ ε₀.
        let mut dir: Vec<f64> = buf[2 + d..].iter().map(|u| 2.0 * u - 1.0).collect();
        let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            dir[0] = 1.0;
        } else {
            for v in dir.iter_mut() {
                *v /= norm;
            }
        }
        let rho = eps0 * buf[1];
        let mut y: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + rho * di).collect();
        // Projection onto the orthant and shrinking into the ball are both
        // nonexpansive toward x, so |y − x| ≤ ε₀ is preserved.
        model.domain().project(&mut y);
        shrink_to_ball(&x, &mut y, region_radius);

        let margin = monotonicity_margin(model, region_radius, s, &x, &y)?;
        if margin > worst || worst_point.is_empty() {
            worst = margin;
            worst_point = Vec::with_capacity(1 + 2 * d);
            worst_point.push(s);
            worst_point.extend_from_slice(&x);
            worst_point.extend_from_slice(&y);
        }
        accepted += 1;
        i += 1;
    }
    if accepted == 0 {
        return Err(AuditError::EmptyRegion);
    }
    Ok(AuditReport::finish(
        AssumptionTag::Monotonicity,
        accepted,
        worst,
        worst_point,
        tolerance,
        0,
        None,
    ))
}

/// Audit the Lyapunov drift condition and the trace nonnegativity condition
/// over `n_points` sampled (s, x).  Returns (drift report, trace report);
/// singular-quotient points are excluded from the first and counted.
pub fn audit_lyapunov(
    model: &ModelSpec,
    region_radius: f64,
    n_points: usize,
    seed: u64,
    tolerance: f64,
) -> Result<(AuditReport, AuditReport), AuditError> {
    if model.lyapunov().is_none() {
        return Err(AuditError::MissingLyapunov(model.name().to_string()));
    }
    let points = region_samples(model, region_radius, n_points, seed)?;
    let mut worst_drift = f64::NEG_INFINITY;
    let mut worst_drift_point = Vec::new();
    let mut excluded = 0usize;
    let mut drift_samples = 0usize;
    let mut worst_trace = f64::NEG_INFINITY;
    let mut worst_trace_point = Vec::new();
    for (s, x) in &points {
        match lyapunov_margin(model, *s, x) {
            Ok(margin) => {
                drift_samples += 1;
                if margin > worst_drift || worst_drift_point.is_empty() {
                    worst_drift = margin;
                    worst_drift_point = std::iter::once(*s).chain(x.iter().copied()).collect();
                }
            }
            Err(AuditError::SingularPoint) => excluded += 1,
            Err(other) => return Err(other),
        }
        let tr = trace_margin(model, *s, x)?;
        if tr > worst_trace || worst_trace_point.is_empty() {
            worst_trace = tr;
            worst_trace_point = std::iter::once(*s).chain(x.iter().copied()).collect();
        }
    }
    if drift_samples == 0 {
        return Err(AuditError::EmptyRegion);
    }
    let drift_report = AuditReport::finish(
        AssumptionTag::Lyapunov,
        drift_samples,
        worst_drift,
        worst_drift_point,
        tolerance,
        excluded,
        None,
    );
    let trace_report = AuditReport::finish(
        AssumptionTag::TraceNonneg,
        points.len(),
        worst_trace,
        worst_trace_point,
        tolerance,
        0,
        None,
    );
    Ok((drift_report, trace_report))
}

/// Quadrature audit of ∫₀ᵀ sup_{|x| ≤ R} (|b(s,x)| + ‖σ(s,x)‖²_HS) ds by
/// composite Simpson over `n_time` intervals with `n_space` spatial samples.
///
/// The report's `worst_margin` (and `extremum`) is the quadrature value;
/// `passed` means the value is finite.  A non-finite coefficient sample fails
/// the audit with the offending (s, x) recorded in `worst_point`.
pub fn audit_integrability(
    model: &ModelSpec,
    region_radius: f64,
    n_time: usize,
    n_space: usize,
    seed: u64,
) -> Result<AuditReport, AuditError> {
    if n_time < 2 || n_space == 0 {
        return Err(AuditError::NoSamples);
    }
    let points = region_samples(model, region_radius, n_space, seed)?;
    let intervals = n_time + n_time % 2; // Simpson needs an even count
    let h = model.horizon() / intervals as f64;
    let mut integral = 0.0;
    let mut sup_value = f64::NEG_INFINITY;
    let mut sup_point = Vec::new();
    for node in 0..=intervals {
        let s = if node == intervals {
            model.horizon()
        } else {
            node as f64 * h
        };
        let mut sup_here = f64::NEG_INFINITY;
        for (_, x) in &points {
            let b = model.drift_vec(s, x);
            let sig = model.diffusion_mat(s, x);
            let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            let signorm_sq = sig.iter().map(|v| v * v).sum::<f64>();
            let value = bnorm + signorm_sq;
            if !value.is_finite() {
                let mut worst_point = vec![s];
                worst_point.extend_from_slice(x);
                return Ok(AuditReport {
                    assumption: AssumptionTag::Integrability,
                    samples: points.len() * (intervals + 1),
                    worst_margin: f64::INFINITY,
                    worst_point,
                    tolerance: f64::MAX,
                    passed: false,
                    excluded: 0,
                    extremum: None,
                });
            }
            if value > sup_here {
                sup_here = value;
                if value > sup_value {
                    sup_value = value;
                    sup_point = vec![s];
                    sup_point.extend_from_slice(x);
                }
            }
        }
        let weight = if node == 0 || node == intervals {
            1.0
        } else if node % 2 == 1 {
            4.0
        } else {
            2.0
        };
        integral += weight * sup_here;
    }
    integral *= h / 3.0;
    Ok(AuditReport {
        assumption: AssumptionTag::Integrability,
        samples: points.len() * (intervals + 1),
        worst_margin: integral,
        worst_point: sup_point,
        // Finiteness sentinel: any finite quadrature value passes.
        tolerance: f64::MAX,
        passed: integral.is_finite(),
        excluded: 0,
        extremum: Some(integral),
    })
}

/// Audit the per-c scaling condition sup_s c·η(s)/η(cs) < ∞ for a modulus.
///
/// c ranges over a geometric grid in [2⁻¹⁰, 1] (`n_c` points, c = 1 included
/// exactly) and s over geometric grids in [cap·2⁻⁴⁰, cap] at three
/// refinements (n_s, 2n_s, 4n_s points).  Pass requires η(cs) > 0 everywhere
/// and a stable per-c sup: the relative spread of the three refinement sups
/// must stay below 1% for every c ("finite-behaved").  `worst_margin` is
/// (max relative spread) − 0.01 against tolerance 0; `extremum` is the
/// finest-grid sup over all (c, s) with its location in `worst_point`.
pub fn audit_ratio(
    spec: &ModulusSpec,
    tag: AssumptionTag,
    domain_cap: f64,
    n_c: usize,
    n_s: usize,
) -> Result<AuditReport, AuditError> {
    if !(domain_cap.is_finite() && domain_cap > 0.0) {
        return Err(AuditError::BadDomainCap(domain_cap));
    }
    if n_c < 2 || n_s < 8 {
        return Err(AuditError::BadResolution);
    }
    let samples = n_c * (n_s + 2 * n_s + 4 * n_s);
    let ln_c_min = (-10.0f64) * std::f64::consts::LN_2;
    let c_grid: Vec<f64> = (0..n_c)
        .map(|j| (ln_c_min * (1.0 - j as f64 / (n_c - 1) as f64)).exp())
        .collect();
    let ln_s_span = (-40.0f64) * std::f64::consts::LN_2;
    let s_grid = |count: usize| -> Vec<f64> {
        (0..count)
            .map(|i| domain_cap * (ln_s_span * (1.0 - i as f64 / (count - 1) as f64)).exp())
            .collect()
    };

    // Ok((sup, argmax s)); Err((c, s)) on a positivity violation of η(cs).
    let sup_for = |c: f64, grid: &[f64]| -> Result<(f64, f64), (f64, f64)> {
        let mut sup = f64::NEG_INFINITY;
        let mut arg = grid[0];
        for &s in grid {
            let denom = spec.eval(c * s);
            if denom <= 0.0 || denom.is_nan() {
                return Err((c, s));
            }
            let ratio = c * spec.eval(s) / denom;
            if ratio > sup {
                sup = ratio;
                arg = s;
            }
        }
        Ok((sup, arg))
    };
    let positivity_failure = |c: f64, s: f64| AuditReport {
        assumption: tag,
        samples,
        worst_margin: f64::INFINITY,
        worst_point: vec![c, s],
        tolerance: 0.0,
        passed: false,
        excluded: 0,
        extremum: None,
    };

    let grids = [s_grid(n_s), s_grid(2 * n_s), s_grid(4 * n_s)];
    let mut worst_spread = f64::NEG_INFINITY;
    let mut overall_sup = f64::NEG_INFINITY;
    let mut overall_point = vec![c_grid[0], grids[0][0]];
    for &c in &c_grid {
        let mut sups = [0.0f64; 3];
        let mut finest_arg = 0.0;
        for (level, grid) in grids.iter().enumerate() {
            match sup_for(c, grid) {
                Ok((sup, arg)) => {
                    sups[level] = sup;
                    finest_arg = arg;
                }
                Err((c, s)) => return Ok(positivity_failure(c, s)),
            }
        }
        let lo = sups.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = sups.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let spread = (hi - lo) / lo.abs().max(f64::MIN_POSITIVE);
        if spread > worst_spread {
            worst_spread = spread;
        }
        if sups[2] > overall_sup {
            overall_sup = sups[2];
            overall_point = vec![c, finest_arg];
        }
    }
    Ok(AuditReport::finish(
        tag,
        samples,
        worst_spread - 0.01,
        overall_point,
        0.0,
        0,
        Some(overall_sup),
    ))
}
