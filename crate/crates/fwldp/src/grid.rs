//! Uniform time grids, discrete paths, and piecewise-constant controls.
//!
//! All solvers and experiments work on a uniform partition 0 = t₀ < … < t_K = T
//! with Δt = T/K.  A [`Path`] stores states at the K+1 nodes; a [`Control`]
//! stores one value h_k ∈ ℝᵐ per step, interpreted as constant on
//! [t_k, t_{k+1}), with cached energy ∫₀ᵀ |h|² dt = Σ_k |h_k|² Δt.  A control
//! may carry an energy bound N, modelling membership in the level set
//! S^N = { h : ½∫|h|² ≤ ... , ∫|h|² ≤ N } used by the weak-convergence
//! statements.

use serde::Serialize;
use thiserror::Error;

/// Errors from grid, path, and control construction.
#[derive(Debug, Error)]
pub enum GridError {
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("grid needs at least one step")]
    NoSteps,
    #[error("node index {index} out of range for {nodes} nodes")]
    NodeOutOfRange { index: usize, nodes: usize },
    #[error("state dimension must be at least 1")]
    BadDimension,
    #[error("expected {expected} values ({steps} steps x dim {dim}), got {got}")]
    BadValueCount {
        expected: usize,
        steps: usize,
        dim: usize,
        got: usize,
    },
    #[error("control values must be finite (offending index {0})")]
    NonFiniteValue(usize),
    #[error("control energy {energy} exceeds declared bound {bound}")]
    EnergyBoundExceeded { energy: f64, bound: f64 },
}

/// Uniform partition of [0, T] into K steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self, GridError> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(GridError::BadHorizon(horizon));
        }
        if steps == 0 {
            return Err(GridError::NoSteps);
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Node t_k; t_0 = 0 and t_K = T exactly.
    pub fn node(&self, k: usize) -> f64 {
        if k == self.steps {
            self.horizon
        } else {
            k as f64 * self.dt()
        }
    }

    /// Same horizon with `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            horizon: self.horizon,
            steps: self.steps * factor.max(1),
        }
    }
}

/// Which solver produced a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PathLabel {
    Sde,
    Skeleton,
    Controlled,
}

/// A discrete path: states at the K+1 grid nodes, row-major (node, coordinate).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Path {
    grid: TimeGrid,
    dim: usize,
    states: Vec<f64>,
    label: PathLabel,
}

impl Path {
    pub(crate) fn from_states(
        grid: TimeGrid,
        dim: usize,
        states: Vec<f64>,
        label: PathLabel,
    ) -> Self {
        debug_assert_eq!(states.len(), (grid.steps + 1) * dim);
        Self {
            grid,
            dim,
            states,
            label,
        }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> PathLabel {
        self.label
    }

    /// Number of nodes, K + 1.
    pub fn nodes(&self) -> usize {
        self.grid.steps + 1
    }

    /// State at node k.
    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    /// Terminal state x(T).
    pub fn endpoint(&self) -> &[f64] {
        self.state(self.grid.steps)
    }

    /// All states, row-major over nodes.
    pub fn states_raw(&self) -> &[f64] {
        &self.states
    }
}

/// Piecewise-constant control h: one value in ℝᵐ per step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Control {
    grid: TimeGrid,
    dim: usize,
    values: Vec<f64>,
    energy: f64,
    bound: Option<f64>,
}

impl Control {
    /// Build from raw step values (length steps × dim, row-major per step).
    pub fn new(grid: TimeGrid, dim: usize, values: Vec<f64>) -> Result<Self, GridError> {
        if dim == 0 {
            return Err(GridError::BadDimension);
        }
        let expected = grid.steps * dim;
        if values.len() != expected {
            return Err(GridError::BadValueCount {
                expected,
                steps: grid.steps,
                dim,
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFiniteValue(bad));
        }
        let energy = energy_of(&values, dim, grid.dt());
        Ok(Self {
            grid,
            dim,
            values,
            energy,
            bound: None,
        })
    }

    /// The zero control.
    pub fn zero(grid: TimeGrid, dim: usize) -> Self {
        Self::new(grid, dim, vec![0.0; grid.steps * dim]).expect("zero control is always valid")
    }

    /// Constant control h(t) ≡ value.
    pub fn constant(grid: TimeGrid, value: &[f64]) -> Result<Self, GridError> {
        let mut values = Vec::with_capacity(grid.steps * value.len());
        for _ in 0..grid.steps {
            values.extend_from_slice(value);
        }
        Self::new(grid, value.len(), values)
    }

    /// Control sampled from a function of time at the left node of each step.
    pub fn from_fn(
        grid: TimeGrid,
        dim: usize,
        mut f: impl FnMut(f64, &mut [f64]),
    ) -> Result<Self, GridError> {
        let mut values = vec![0.0; grid.steps * dim];
        for k in 0..grid.steps {
            f(grid.node(k), &mut values[k * dim..(k + 1) * dim]);
        }
        Self::new(grid, dim, values)
    }

    /// h(t) = sin(2π · frequency · t) · amplitude, sampled at left nodes.
    pub fn sinusoid(grid: TimeGrid, frequency: f64, amplitude: &[f64]) -> Result<Self, GridError> {
        let dim = amplitude.len();
        Self::from_fn(grid, dim, |t, out| {
            let s = (2.0 * std::f64::consts::PI * frequency * t).sin();
            for (o, a) in out.iter_mut().zip(amplitude) {
                *o = s * a;
            }
        })
    }

    /// Tag with an energy bound N (membership in S^N); fails if ∫|h|² > N.
    pub fn with_bound(mut self, bound: f64) -> Result<Self, GridError> {
        if self.energy > bound {
            return Err(GridError::EnergyBoundExceeded {
                energy: self.energy,
                bound,
            });
        }
        self.bound = Some(bound);
        Ok(self)
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cached energy ∫₀ᵀ |h(t)|² dt = Σ_k |h_k|² Δt.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Direct recomputation of the energy from the stored values.
    pub fn recompute_energy(&self) -> f64 {
        energy_of(&self.values, self.dim, self.grid.dt())
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    /// Value h_k on step k.
    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// All step values, row-major.
    pub fn values_raw(&self) -> &[f64] {
        &self.values
    }

    /// Reinterpret on a new grid: the piecewise-constant function t ↦ h(t) is
    /// evaluated at the left node of each new step.
    pub fn resample(&self, grid: TimeGrid) -> Control {
        let old_dt = self.grid.dt();
        let mut values = vec![0.0; grid.steps * self.dim];
        for k in 0..grid.steps {
            let t = grid.node(k);
            let idx = ((t / old_dt).floor() as usize).min(self.grid.steps - 1);
            values[k * self.dim..(k + 1) * self.dim].copy_from_slice(self.value(idx));
        }
        Control::new(grid, self.dim, values).expect("resampled control is valid")
    }
}

fn energy_of(values: &[f64], dim: usize, dt: f64) -> f64 {
    let mut total = 0.0;
    for step in values.chunks_exact(dim) {
        let mut sq = 0.0;
        for v in step {
            sq += v * v;
        }
        total += sq * dt;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_nodes_cover_horizon_exactly() {
        let grid = TimeGrid::new(0.7, 7).unwrap();
        assert_eq!(grid.node(0), 0.0, "t_0 must be 0");
        assert_eq!(grid.node(7), 0.7, "t_K must equal the horizon exactly");
        assert!((grid.dt() - 0.1).abs() < 1e-16);
    }

    #[test]
    fn grid_rejects_degenerate_input() {
        assert!(TimeGrid::new(0.0, 4).is_err(), "zero horizon must fail");
        assert!(TimeGrid::new(-1.0, 4).is_err(), "negative horizon must fail");
        assert!(TimeGrid::new(f64::NAN, 4).is_err(), "NaN horizon must fail");
        assert!(TimeGrid::new(1.0, 0).is_err(), "zero steps must fail");
    }

    #[test]
    fn constant_control_energy_is_exact() {
        let grid = TimeGrid::new(2.0, 8).unwrap();
        let h = Control::constant(grid, &[3.0]).unwrap();
        // ∫₀² 9 dt = 18, assembled as 8 · 9 · 0.25.
        assert!((h.energy() - 18.0).abs() < 1e-12, "energy of h ≡ 3 on [0,2]");
    }

    #[test]
    fn energy_bound_is_enforced() {
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let h = Control::constant(grid, &[2.0]).unwrap(); // energy 4
        assert!(h.clone().with_bound(4.0).is_ok(), "N = energy is admissible");
        let err = h.with_bound(3.9).unwrap_err();
        assert!(
            matches!(err, GridError::EnergyBoundExceeded { .. }),
            "energy above N must be rejected"
        );
    }

    #[test]
    fn non_finite_control_values_are_rejected() {
        let grid = TimeGrid::new(1.0, 2).unwrap();
        let err = Control::new(grid, 1, vec![1.0, f64::INFINITY]).unwrap_err();
        assert!(matches!(err, GridError::NonFiniteValue(1)));
    }

    #[test]
    fn resample_preserves_piecewise_constant_values() {
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let h = Control::new(grid, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let fine = h.resample(grid.refined(2));
        assert_eq!(
            fine.values_raw(),
            &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0],
            "doubling the grid must repeat each step value"
        );
        // Energy is invariant under refinement of a piecewise-constant control.
        assert!((fine.energy() - h.energy()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn cached_energy_matches_direct_recomputation(
            values in proptest::collection::vec(-50.0f64..50.0, 1..60),
            steps_pow in 0usize..3,
        ) {
            // Use a dim that divides the value count.
            let dim = 1 << steps_pow;
            let mut vals = values;
            while vals.len() % dim != 0 { vals.push(0.0); }
            let steps = vals.len() / dim;
            let grid = TimeGrid::new(1.5, steps).unwrap();
            let h = Control::new(grid, dim, vals).unwrap();
            let direct = h.recompute_energy();
            prop_assert!((h.energy() - direct).abs() <= 1e-12 * (1.0 + direct.abs()),
                "cached energy {} vs recomputed {}", h.energy(), direct);
        }
    }
}
