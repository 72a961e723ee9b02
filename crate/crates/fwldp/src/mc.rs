//! Monte Carlo experiments probing the large-deviation behavior empirically:
//! rare-event probability scaling (ε log P against the rate function), the
//! continuity of the skeleton map along weakly converging controls
//! (statement (i)), and convergence in probability of controlled paths to
//! their skeleton in the uniform metric (statement (ii)).
//!
//! Reproducibility contract: sample j of a run is a pure function of
//! (seed, j) through the counter-based noise streams, so estimates are
//! bit-identical across runs and across any degree of parallelism — sample
//! outcomes are collected in index order and reduced serially.  The same
//! (seed, j) pair drives sample j at every ε, giving common random numbers
//! across the ε column (variance-free monotone comparisons on models where
//! the coupling is monotone).
//!
//! Zero-hit cells carry no ε·log p̂ value; they instead report the 95%
//! upper confidence bound 3/n for the event probability (rule of three).

use crate::grid::{Control, GridError, Path, TimeGrid};
use crate::integrate::{
    simulate_controlled_sample, simulate_sde_sample, solve_skeleton, uniform_distance, SolveError,
};
use crate::model::ModelSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Measurable path events for P(X^ε ∈ A).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EventSpec {
    /// ⟨a, x(T)⟩ ≥ c.  A zero normal with c ≤ 0 is the certain event.
    EndpointHalfspace { a: Vec<f64>, c: f64 },
    /// sup_t |x(t)| ≥ radius — the exit event of the first-passage time τ_R.
    ExitBall { radius: f64 },
}

impl EventSpec {
    /// Deterministic predicate on a simulated path.
    pub fn occurs(&self, path: &Path) -> bool {
        match self {
            EventSpec::EndpointHalfspace { a, c } => {
                let dot: f64 = a.iter().zip(path.endpoint()).map(|(ai, xi)| ai * xi).sum();
                dot >= *c
            }
            EventSpec::ExitBall { radius } => (0..path.nodes()).any(|k| {
                path.state(k).iter().map(|v| v * v).sum::<f64>().sqrt() >= *radius
            }),
        }
    }

    fn validate(&self, dim: usize) -> Result<(), SolveError> {
        match self {
            EventSpec::EndpointHalfspace { a, c } => {
                if a.len() != dim {
                    return Err(SolveError::TargetDimMismatch {
                        expected: dim,
                        got: a.len(),
                    });
                }
                if !a.iter().all(|v| v.is_finite()) || !c.is_finite() {
                    return Err(SolveError::BadEvent("half-space coefficients must be finite"));
                }
            }
            EventSpec::ExitBall { radius } => {
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(SolveError::BadEvent("exit radius must be finite and >= 0"));
                }
            }
        }
        Ok(())
    }
}

/// One rare-event estimate at a fixed ε.  `p_hat` = hits/n; `eps_log_p` is
/// present iff hits > 0; blow-up samples are excluded from hits and counted.
#[derive(Clone, Debug, Serialize)]
pub struct MCEstimate {
    pub epsilon: f64,
    pub n: usize,
    pub hits: usize,
    pub blowups: usize,
    pub p_hat: f64,
    pub std_err: f64,
    pub eps_log_p: Option<f64>,
}

/// Hit/blow-up counts over the half-open substream range [lo, hi).
fn count_hits(
    model: &ModelSpec,
    event: &EventSpec,
    epsilon: f64,
    grid: &TimeGrid,
    seed: u64,
    lo: u64,
    hi: u64,
) -> Result<(usize, usize), SolveError> {
    let outcomes: Vec<Result<bool, SolveError>> = (lo..hi)
        .into_par_iter()
        .map(|j| simulate_sde_sample(model, epsilon, grid, seed, j).map(|p| event.occurs(&p)))
        .collect();
    let mut hits = 0;
    let mut blowups = 0;
    for outcome in outcomes {
        match outcome {
            Ok(true) => hits += 1,
            Ok(false) => {}
            Err(SolveError::BlowUp { .. }) => blowups += 1,
            Err(other) => return Err(other),
        }
    }
    Ok((hits, blowups))
}

/// Estimate P(X^ε ∈ A) for each ε by n independent tamed-Euler samples with
/// per-sample substreams of `seed` (sample j uses substream j at every ε).
pub fn estimate_rare_event(
    model: &ModelSpec,
    event: &EventSpec,
    eps_list: &[f64],
    n: usize,
    grid: &TimeGrid,
    seed: u64,
) -> Result<Vec<MCEstimate>, SolveError> {
    event.validate(model.dim())?;
    if n == 0 {
        return Err(SolveError::BadSampleCount);
    }
    for &eps in eps_list {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(SolveError::BadEpsilon(eps));
        }
    }
    eps_list
        .iter()
        .map(|&epsilon| {
            let (hits, blowups) = count_hits(model, event, epsilon, grid, seed, 0, n as u64)?;
            let p_hat = hits as f64 / n as f64;
            Ok(MCEstimate {
                epsilon,
                n,
                hits,
                blowups,
                p_hat,
                std_err: (p_hat * (1.0 - p_hat) / n as f64).sqrt(),
                eps_log_p: (hits > 0).then(|| epsilon * p_hat.ln()),
            })
        })
        .collect()
}

/// One row of the LDP scaling table: ε·log p̂ against −(rate value).
#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow {
    pub epsilon: f64,
    pub n: usize,
    pub hits: usize,
    pub blowups: usize,
    pub p_hat: f64,
    pub std_err: f64,
    pub eps_log_p: Option<f64>,
    pub neg_rate: f64,
    /// |ε·log p̂ − (−rate)|; absent on zero-hit cells.
    pub gap: Option<f64>,
    /// 95% upper confidence bound 3/n, reported only on zero-hit cells.
    pub p_upper_95: Option<f64>,
}

/// Tabulate ε·log p̂ against −rate_value (the LDP predicts convergence as
/// ε → 0 when rate_value = inf_A I).  `rate_value` comes from the action
/// module or a closed-form oracle.
pub fn ldp_scaling_report(
    model: &ModelSpec,
    event: &EventSpec,
    eps_list: &[f64],
    n: usize,
    grid: &TimeGrid,
    seed: u64,
    rate_value: f64,
) -> Result<Vec<ScalingRow>, SolveError> {
    if rate_value < 0.0 || rate_value.is_nan() {
        return Err(SolveError::BadPenalty(rate_value));
    }
    let estimates = estimate_rare_event(model, event, eps_list, n, grid, seed)?;
    Ok(estimates
        .into_iter()
        .map(|e| ScalingRow {
            epsilon: e.epsilon,
            n: e.n,
            hits: e.hits,
            blowups: e.blowups,
            p_hat: e.p_hat,
            std_err: e.std_err,
            eps_log_p: e.eps_log_p,
            neg_rate: -rate_value,
            gap: e.eps_log_p.map(|v| (v + rate_value).abs()),
            p_upper_95: (e.hits == 0).then(|| 3.0 / e.n as f64),
        })
        .collect())
}

/// One row of the statement (ii) experiment at a fixed ε.  Fractions are
/// over the non-blow-up samples; first-passage times are censored at the
/// horizon (a sample that never crosses contributes T to the mean).
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub n: usize,
    pub excluded: usize,
    /// Fraction with ρ(Y^ε, Z) > δ.
    pub fraction_exceed: f64,
    pub mean_rho: f64,
    pub max_rho: f64,
    /// Fraction whose τ_R = inf{t : |Y^ε(t)| ≥ R} occurs before T.
    pub frac_tau_radius: f64,
    pub mean_tau_radius: f64,
    /// Fraction whose τ_p = inf{t : |Y^ε(t) − Z(t)|² ≥ p} occurs before T.
    pub frac_tau_passage: f64,
    pub mean_tau_passage: f64,
}

struct SampleDiag {
    rho: f64,
    tau_radius: Option<f64>,
    tau_passage: Option<f64>,
}

fn diagnose(path: &Path, skeleton: &Path, radius: f64, passage: f64) -> SampleDiag {
    let d = path.dim();
    let grid = path.grid();
    let mut rho_sq = 0.0f64;
    let mut tau_radius = None;
    let mut tau_passage = None;
    for k in 0..path.nodes() {
        let y = path.state(k);
        let z = skeleton.state(k);
        let mut dy_sq = 0.0;
        let mut ny_sq = 0.0;
        for i in 0..d {
            let diff = y[i] - z[i];
            dy_sq += diff * diff;
            ny_sq += y[i] * y[i];
        }
        rho_sq = rho_sq.max(dy_sq);
        if tau_radius.is_none() && ny_sq.sqrt() >= radius {
            tau_radius = Some(grid.node(k));
        }
        if tau_passage.is_none() && dy_sq >= passage {
            tau_passage = Some(grid.node(k));
        }
    }
    SampleDiag {
        rho: rho_sq.sqrt(),
        tau_radius,
        tau_passage,
    }
}

/// Statement (ii) experiment: fix a deterministic control h, compute the
/// skeleton Z = x^h once, and for each ε measure how often the controlled
/// path Y^ε strays from Z by more than δ in the uniform metric, together
/// with first-passage diagnostics for the exit radius R and the squared
/// deviation threshold p (the proofs' choice is p = δ²).
#[allow(clippy::too_many_arguments)]
pub fn convergence_statement_ii(
    model: &ModelSpec,
    control: &Control,
    eps_list: &[f64],
    delta: f64,
    n: usize,
    grid: &TimeGrid,
    seed: u64,
    radius: f64,
    passage: f64,
) -> Result<Vec<ConvergenceRow>, SolveError> {
    if n == 0 {
        return Err(SolveError::BadSampleCount);
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(SolveError::BadTolerance(delta));
    }
    if !(radius.is_finite() && radius > 0.0) || !(passage.is_finite() && passage > 0.0) {
        return Err(SolveError::BadEvent(
            "first-passage thresholds must be finite and > 0",
        ));
    }
    for &eps in eps_list {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(SolveError::BadEpsilon(eps));
        }
    }
    let skeleton = solve_skeleton(model, control, grid)?;
    eps_list
        .iter()
        .map(|&epsilon| {
            let outcomes: Vec<Result<SampleDiag, SolveError>> = (0..n as u64)
                .into_par_iter()
                .map(|j| {
                    simulate_controlled_sample(model, epsilon, control, grid, seed, j)
                        .map(|path| diagnose(&path, &skeleton, radius, passage))
                })
                .collect();
            let mut excluded = 0usize;
            let mut exceed = 0usize;
            let mut rho_sum = 0.0;
            let mut rho_max = 0.0f64;
            let mut radius_hits = 0usize;
            let mut radius_time = 0.0;
            let mut passage_hits = 0usize;
            let mut passage_time = 0.0;
            let horizon = grid.horizon();
            for outcome in outcomes {
                match outcome {
                    Ok(diag) => {
                        if diag.rho > delta {
                            exceed += 1;
                        }
                        rho_sum += diag.rho;
                        rho_max = rho_max.max(diag.rho);
                        match diag.tau_radius {
                            Some(t) => {
                                radius_hits += 1;
                                radius_time += t;
                            }
                            None => radius_time += horizon,
                        }
                        match diag.tau_passage {
                            Some(t) => {
                                passage_hits += 1;
                                passage_time += t;
                            }
                            None => passage_time += horizon,
                        }
                    }
                    Err(SolveError::BlowUp { .. }) => excluded += 1,
                    Err(other) => return Err(other),
                }
            }
            let valid = n - excluded;
            let denom = valid.max(1) as f64;
            Ok(ConvergenceRow {
                epsilon,
                n,
                excluded,
                fraction_exceed: exceed as f64 / denom,
                mean_rho: rho_sum / denom,
                max_rho: rho_max,
                frac_tau_radius: radius_hits as f64 / denom,
                mean_tau_radius: radius_time / denom,
                frac_tau_passage: passage_hits as f64 / denom,
                mean_tau_passage: passage_time / denom,
            })
        })
        .collect()
}

/// One row of the statement (i) experiment.
#[derive(Clone, Debug, Serialize)]
pub struct WeakRow {
    pub index: usize,
    /// ρ(x^{h_index}, x^{h_limit}).
    pub distance: f64,
}

/// Statement (i) experiment: continuity of the skeleton map h ↦ x^h along a
/// family of controls indexed by n (e.g. sinusoids sin(2πnt)·v, whose weak
/// limit is 0).  Returns the uniform distance to the limit skeleton per index.
pub fn weak_convergence_statement_i(
    model: &ModelSpec,
    family: &[(usize, Control)],
    limit: &Control,
    grid: &TimeGrid,
) -> Result<Vec<WeakRow>, SolveError> {
    let limit_skeleton = solve_skeleton(model, limit, grid)?;
    family
        .iter()
        .map(|(index, control)| {
            let path = solve_skeleton(model, control, grid)?;
            Ok(WeakRow {
                index: *index,
                distance: uniform_distance(&path, &limit_skeleton)?,
            })
        })
        .collect()
}

/// The sinusoid family h_n(t) = sin(2πnt)·amplitude used by the weak
/// convergence experiment.
pub fn sinusoid_family(
    grid: TimeGrid,
    indices: &[usize],
    amplitude: &[f64],
) -> Result<Vec<(usize, Control)>, GridError> {
    indices
        .iter()
        .map(|&idx| Ok((idx, Control::sinusoid(grid, idx as f64, amplitude)?)))
        .collect()
}
