//! Tamed Euler–Maruyama integration of the SDE, the skeleton ODE, and the
//! controlled SDE, plus the uniform metric ρ.
//!
//! All three solvers share one stepping core,
//!
//! ```text
//!     x_{k+1} = Π_D ( x_k + b̃(t_k, x_k) Δt + σ(t_k, x_k) h_k Δt
//!                          + √ε σ(t_k, x_k) ΔB_k ),
//! ```
//!
//! where b̃ = b / (1 + Δt·|b|) is the tamed drift (the taming factor controls
//! superlinear drifts without altering the Δt → 0 limit), Π_D is the domain
//! projection (identity for unconstrained models), h is an optional
//! piecewise-constant control, and ΔB are counter-based Gaussian increments.
//! With ε = 0 the noise term is skipped entirely, so
//! `simulate_sde(model, 0.0, …)` and `simulate_controlled(model, 0.0, h, …)`
//! perform *exactly* the same arithmetic as `solve_skeleton` — the ε = 0
//! degeneracies hold to the last bit, not merely up to rounding.
//!
//! Non-finite states are reported as [`SolveError::BlowUp`] with the first
//! offending step; states are never clamped to hide overflow.

use crate::grid::{Control, Path, PathLabel, TimeGrid};
use crate::model::ModelSpec;
use crate::rng::NoiseStream;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("state became non-finite at step {step} (of {steps})")]
    BlowUp { step: usize, steps: usize },
    #[error("grid horizon {grid} does not match model horizon {model}")]
    HorizonMismatch { grid: f64, model: f64 },
    #[error("control grid does not match integration grid")]
    ControlGridMismatch,
    #[error("control dimension {control} does not match noise dimension {noise}")]
    ControlDimMismatch { control: usize, noise: usize },
    #[error("epsilon must be finite and >= 0, got {0}")]
    BadEpsilon(f64),
    #[error("paths live on different grids or dimensions")]
    PathMismatch,
    #[error("target dimension {got} does not match state dimension {expected}")]
    TargetDimMismatch { expected: usize, got: usize },
    #[error("target tolerance must be finite and > 0, got {0}")]
    BadTolerance(f64),
    #[error("half-space normal must be nonzero and finite")]
    DegenerateTarget,
    #[error("penalty weight must be finite and >= 0, got {0}")]
    BadPenalty(f64),
    #[error("event specification invalid: {0}")]
    BadEvent(&'static str),
    #[error("sample count must be >= 1")]
    BadSampleCount,
}

/// Forward pass with the per-step projection activity masks needed by the
/// discrete adjoint: masks[k·d + i] = 1 if coordinate i passed through the
/// projection untouched at step k, 0 if it was clamped to the boundary.
pub(crate) struct ForwardRecord {
    pub states: Vec<f64>,
    pub masks: Vec<u8>,
}

/// Common stepping core.  `noise = Some((seed, sample))` draws counter-based
/// increments; `control` adds σh dt.  When `epsilon == 0` no randomness is
/// consumed at all.
fn integrate_core(
    model: &ModelSpec,
    epsilon: f64,
    control: Option<&Control>,
    grid: &TimeGrid,
    noise: Option<(u64, u64)>,
    record_masks: bool,
) -> Result<(Vec<f64>, Vec<u8>), SolveError> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(SolveError::BadEpsilon(epsilon));
    }
    if grid.horizon() != model.horizon() {
        return Err(SolveError::HorizonMismatch {
            grid: grid.horizon(),
            model: model.horizon(),
        });
    }
    if let Some(c) = control {
        if c.grid() != *grid {
            return Err(SolveError::ControlGridMismatch);
        }
        if c.dim() != model.noise_dim() {
            return Err(SolveError::ControlDimMismatch {
                control: c.dim(),
                noise: model.noise_dim(),
            });
        }
    }

    let d = model.dim();
    let m = model.noise_dim();
    let steps = grid.steps();
    let dt = grid.dt();
    let sqrt_eps = epsilon.sqrt();
    let domain = model.domain();

    let mut states = Vec::with_capacity((steps + 1) * d);
    states.extend_from_slice(model.x0());
    let mut masks = if record_masks {
        Vec::with_capacity(steps * d)
    } else {
        Vec::new()
    };

    let mut x = model.x0().to_vec();
    let mut b = vec![0.0; d];
    let mut sig = vec![0.0; d * m];
    let mut dw = vec![0.0; m];
    let mut stream = if epsilon > 0.0 {
        noise.map(|(seed, sample)| NoiseStream::new(seed, sample, m))
    } else {
        None
    };

    for k in 0..steps {
        let t = grid.node(k);
        model.drift(t, &x, &mut b);
        // Tamed drift: b / (1 + Δt·|b|).
        let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let tame = 1.0 / (1.0 + dt * bnorm);
        model.diffusion(t, &x, &mut sig);

        for (i, xi) in x.iter_mut().enumerate() {
            let mut incr = b[i] * tame * dt;
            if let Some(c) = control {
                let h = c.value(k);
                let mut sh = 0.0;
                for (j, hj) in h.iter().enumerate() {
                    sh += sig[i * m + j] * hj;
                }
                incr += sh * dt;
            }
            *xi += incr;
        }
        if let Some(stream) = stream.as_mut() {
            stream.fill_increment(dt, &mut dw);
            for (i, xi) in x.iter_mut().enumerate() {
                let mut sw = 0.0;
                for (j, wj) in dw.iter().enumerate() {
                    sw += sig[i * m + j] * wj;
                }
                *xi += sqrt_eps * sw;
            }
        }

        if record_masks {
            for xi in x.iter() {
                masks.push(u8::from(!(*xi < 0.0 && matches!(domain, crate::model::Domain::NonnegativeOrthant))));
            }
        }
        domain.project(&mut x);

        if !x.iter().all(|v| v.is_finite()) {
            return Err(SolveError::BlowUp { step: k, steps });
        }
        states.extend_from_slice(&x);
    }
    Ok((states, masks))
}

/// Simulate the small-noise SDE dX = b dt + √ε σ dB (sample index 0).
pub fn simulate_sde(
    model: &ModelSpec,
    epsilon: f64,
    grid: &TimeGrid,
    seed: u64,
) -> Result<Path, SolveError> {
    simulate_sde_sample(model, epsilon, grid, seed, 0)
}

/// Simulate sample `sample` of the small-noise SDE under master `seed`.
pub fn simulate_sde_sample(
    model: &ModelSpec,
    epsilon: f64,
    grid: &TimeGrid,
    seed: u64,
    sample: u64,
) -> Result<Path, SolveError> {
    let (states, _) = integrate_core(model, epsilon, None, grid, Some((seed, sample)), false)?;
    Ok(Path::from_states(*grid, model.dim(), states, PathLabel::Sde))
}

/// Solve the deterministic skeleton ODE dx = b dt + σh dt.
pub fn solve_skeleton(
    model: &ModelSpec,
    control: &Control,
    grid: &TimeGrid,
) -> Result<Path, SolveError> {
    let (states, _) = integrate_core(model, 0.0, Some(control), grid, None, false)?;
    Ok(Path::from_states(
        *grid,
        model.dim(),
        states,
        PathLabel::Skeleton,
    ))
}

/// Skeleton forward pass with projection masks (for the discrete adjoint).
pub(crate) fn skeleton_forward(
    model: &ModelSpec,
    control: &Control,
    grid: &TimeGrid,
) -> Result<ForwardRecord, SolveError> {
    let (states, masks) = integrate_core(model, 0.0, Some(control), grid, None, true)?;
    Ok(ForwardRecord { states, masks })
}

/// Simulate the controlled SDE dY = b dt + σh dt + √ε σ dB (sample index 0).
pub fn simulate_controlled(
    model: &ModelSpec,
    epsilon: f64,
    control: &Control,
    grid: &TimeGrid,
    seed: u64,
) -> Result<Path, SolveError> {
    simulate_controlled_sample(model, epsilon, control, grid, seed, 0)
}

/// Simulate sample `sample` of the controlled SDE under master `seed`.
pub fn simulate_controlled_sample(
    model: &ModelSpec,
    epsilon: f64,
    control: &Control,
    grid: &TimeGrid,
    seed: u64,
    sample: u64,
) -> Result<Path, SolveError> {
    let (states, _) = integrate_core(
        model,
        epsilon,
        Some(control),
        grid,
        Some((seed, sample)),
        false,
    )?;
    Ok(Path::from_states(
        *grid,
        model.dim(),
        states,
        PathLabel::Controlled,
    ))
}

/// Uniform metric ρ(p, q) = max_k |p(t_k) − q(t_k)| over shared grid nodes.
pub fn uniform_distance(p: &Path, q: &Path) -> Result<f64, SolveError> {
    if p.grid() != q.grid() || p.dim() != q.dim() {
        return Err(SolveError::PathMismatch);
    }
    let d = p.dim();
    let mut worst = 0.0f64;
    for k in 0..p.nodes() {
        let (a, b) = (p.state(k), q.state(k));
        let mut sq = 0.0;
        for i in 0..d {
            let diff = a[i] - b[i];
            sq += diff * diff;
        }
        worst = worst.max(sq);
    }
    Ok(worst.sqrt())
}
