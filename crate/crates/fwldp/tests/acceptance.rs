//! Acceptance suite: ten end-to-end criteria, each printing exactly one
//! pass/fail line (visible with `--nocapture`, and always on failure).
//!
//! Every tolerance, sample count, seed, and wall-clock budget is pinned as a
//! constant here; nothing is read from the environment.  All runs are
//! deterministic, so each criterion either always passes or always fails.

use fwldp::action::{minimize_endpoint_action, OptimizerOptions, TargetSpec};
use fwldp::grid::{Control, TimeGrid};
use fwldp::integrate::{
    simulate_controlled, simulate_sde, solve_skeleton, uniform_distance,
};
use fwldp::mc::{
    convergence_statement_ii, estimate_rare_event, ldp_scaling_report, sinusoid_family,
    weak_convergence_statement_i, EventSpec,
};
use fwldp::registry::{build_model, registered_models};
use fwldp::verify::{audit_lyapunov, audit_monotonicity};
use fwldp::{action_functional, ModelSpec};
use statrs::distribution::{ContinuousCDF, Normal};
use std::collections::BTreeMap;
use std::time::Instant;

/// Master seed for every sampled criterion.
const SEED: u64 = 2026;

fn defaults() -> BTreeMap<String, f64> {
    BTreeMap::new()
}

fn overrides(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect()
}

/// Print the single pass/fail line for a criterion, then enforce it.
fn report(number: u32, name: &str, ok: bool, detail: &str) {
    println!(
        "criterion {number:02} ({name}): {}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {number:02} ({name}) failed: {detail}");
}

/// Upper tail of the standard normal, evaluated in the numerically exact
/// direction: P(Z >= x) = Phi(-x).
fn gauss_upper_tail(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(-x)
}

// ---------------------------------------------------------------------------
// 1. Schilder rate: Brownian motion from 0 to 1 over [0, 1] costs 1/2.
// ---------------------------------------------------------------------------

const C1_STEPS: usize = 512;
const C1_ACTION_TOL: f64 = 1e-3;
const C1_TERMINAL_TOL: f64 = 1e-4;
const C1_TIME_BUDGET_S: f64 = 10.0;

#[test]
fn criterion_01_schilder_rate() {
    let start = Instant::now();
    let model = build_model("brownian", &defaults()).unwrap();
    let grid = TimeGrid::new(1.0, C1_STEPS).unwrap();
    let target = TargetSpec::point(vec![1.0], C1_TERMINAL_TOL);
    let result =
        minimize_endpoint_action(&model, &target, &grid, &OptimizerOptions::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let detail = format!(
        "action {:.6} (want 0.5 +/- {C1_ACTION_TOL}), terminal {:.2e} (cap {C1_TERMINAL_TOL}), \
         converged {}, {elapsed:.2}s (cap {C1_TIME_BUDGET_S}s)",
        result.action, result.terminal_error, result.converged
    );
    let ok = result.converged
        && (result.action - 0.5).abs() <= C1_ACTION_TOL
        && result.terminal_error <= C1_TERMINAL_TOL
        && elapsed <= C1_TIME_BUDGET_S;
    report(1, "schilder rate", ok, &detail);
}

// ---------------------------------------------------------------------------
// 2. Ornstein–Uhlenbeck rate: linear-quadratic closed form
//        I(z) = a z^2 / (1 - e^{-2aT}),   a = T = 1,
//    cross-checked by a dense grid search over the exponential control
//    family h(t) = p e^{t} + q before the optimizer runs.
// ---------------------------------------------------------------------------

const C2_STEPS: usize = 16_384;
const C2_TARGETS: [f64; 3] = [0.5, 1.0, 2.0];
const C2_ACTION_TOL: f64 = 1e-3;
const C2_CROSSCHECK_TOL: f64 = 1e-6;
const C2_GRID_POINTS: usize = 40_001; // q in [-2, 2], step 1e-4, 0 on-grid

/// Closed form for the OU endpoint rate from x0 = 0 with a = T = 1.
fn ou_rate_closed_form(z: f64) -> f64 {
    z * z / (1.0 - (-2.0f64).exp())
}

/// Exact energy and endpoint of the OU skeleton under h(t) = p e^t + q,
/// from the antiderivatives of e^{2t}, e^t, and the variation-of-constants
/// endpoint x(1) = e^{-1} \int_0^1 e^s h(s) ds.
fn ou_family_energy(p: f64, q: f64) -> f64 {
    let e = std::f64::consts::E;
    0.5 * (p * p * (e * e - 1.0) / 2.0 + 2.0 * p * q * (e - 1.0) + q * q)
}

fn ou_family_endpoint_coeffs() -> (f64, f64) {
    let e = std::f64::consts::E;
    ((e - 1.0 / e) / 2.0, 1.0 - 1.0 / e)
}

#[test]
fn criterion_02_ou_rate() {
    // Cross-check the closed form by brute force over the exponential family.
    let (a_coef, b_coef) = ou_family_endpoint_coeffs();
    for &z in &C2_TARGETS {
        let mut best = f64::INFINITY;
        let mut best_q = f64::NAN;
        for j in 0..C2_GRID_POINTS {
            let q = -2.0 + 4.0 * j as f64 / (C2_GRID_POINTS - 1) as f64;
            let p = (z - q * b_coef) / a_coef;
            let energy = ou_family_energy(p, q);
            if energy < best {
                best = energy;
                best_q = q;
            }
        }
        assert!(
            (best - ou_rate_closed_form(z)).abs() <= C2_CROSSCHECK_TOL,
            "family grid search {best:.9} vs closed form {:.9} at z = {z}",
            ou_rate_closed_form(z)
        );
        assert!(
            best_q.abs() <= 1e-3,
            "optimum should sit at q = 0 (pure exponential), got q = {best_q}"
        );
    }

    // Main check: the penalty optimizer reproduces the closed form.
    let model = build_model("ou", &defaults()).unwrap();
    let grid = TimeGrid::new(1.0, C2_STEPS).unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for &z in &C2_TARGETS {
        let target = TargetSpec::point(vec![z], 1e-5);
        let result =
            minimize_endpoint_action(&model, &target, &grid, &OptimizerOptions::default())
                .unwrap();
        let exact = ou_rate_closed_form(z);
        let err = (result.action - exact).abs();
        ok &= result.converged && err <= C2_ACTION_TOL;
        detail.push_str(&format!(
            "z={z}: action {:.6} vs {exact:.6} (err {err:.2e}); ",
            result.action
        ));
    }
    report(2, "ou rate", ok, &detail);
}

// ---------------------------------------------------------------------------
// 3. Hölder-1/3 monotonicity: the one-sided bound holds with zero slack.
//    With drift -x^{1/3} and diffusion x^{2/3} the pairing
//    2(x - y)(b(x) - b(y)) + (sigma(x) - sigma(y))^2 collapses to
//    -(x^{1/3} - y^{1/3})^2 (x^{2/3} + y^{2/3}) <= 0, so the audit is
//    required to pass with tolerance exactly zero.
// ---------------------------------------------------------------------------

const C3_RADIUS: f64 = 5.0;
const C3_PAIRS: usize = 100_000;
const C3_TOL: f64 = 0.0;

#[test]
fn criterion_03_holder13_monotonicity() {
    let model = build_model("holder13", &defaults()).unwrap();
    let audit = audit_monotonicity(&model, C3_RADIUS, C3_PAIRS, SEED, C3_TOL).unwrap();
    let detail = format!(
        "worst margin {:.3e} over {} pairs (tol {C3_TOL})",
        audit.worst_margin, audit.samples
    );
    let ok = audit.passed && audit.samples == C3_PAIRS && audit.worst_margin <= C3_TOL;
    report(3, "holder13 monotonicity", ok, &detail);
}

// ---------------------------------------------------------------------------
// 4. Duffing–van der Pol Lyapunov: drift bound against K(1 + V) with the
//    chained constant K = 5*eta0 + 10*eta1 + 2*alpha2 (= 17 at defaults).
// ---------------------------------------------------------------------------

const C4_RADIUS: f64 = 10.0;
const C4_POINTS: usize = 100_000;
const C4_TOL: f64 = 1e-9;
const C4_K_CONST: f64 = 5.0 + 10.0 + 2.0;

#[test]
fn criterion_04_duffing_lyapunov() {
    let model = build_model("duffing_vdp", &defaults()).unwrap();
    let bundle = model.lyapunov().expect("duffing ships a Lyapunov bundle");
    let weight_ok = (bundle.f_weight(0.37) - C4_K_CONST).abs() <= 1e-12;
    let (drift, trace) = audit_lyapunov(&model, C4_RADIUS, C4_POINTS, SEED, C4_TOL).unwrap();
    let detail = format!(
        "weight {} (want {C4_K_CONST}), drift margin {:.3e}, trace margin {:.3e} over {} points",
        bundle.f_weight(0.37),
        drift.worst_margin,
        trace.worst_margin,
        drift.samples
    );
    let ok = weight_ok
        && drift.passed
        && trace.passed
        && drift.samples == C4_POINTS
        && drift.excluded == 0;
    report(4, "duffing lyapunov", ok, &detail);
}

// ---------------------------------------------------------------------------
// 5. SIR Lyapunov: drift-bound margins stay within 1e-9 of the gamma/2
//    weight over sampled orthant points.
// ---------------------------------------------------------------------------

const C5_RADIUS: f64 = 10.0;
const C5_POINTS: usize = 100_000;
const C5_TOL: f64 = 1e-9;

#[test]
fn criterion_05_sir_lyapunov() {
    let model = build_model("sir", &defaults()).unwrap();
    let bundle = model.lyapunov().expect("sir ships a Lyapunov bundle");
    let weight_ok = (bundle.f_weight(0.37) - 0.5).abs() <= 1e-12; // gamma/2 at gamma = 1
    let (drift, trace) = audit_lyapunov(&model, C5_RADIUS, C5_POINTS, SEED, C5_TOL).unwrap();
    let detail = format!(
        "drift margin {:.3e} (tol {C5_TOL}), trace margin {:.3e} over {} orthant points",
        drift.worst_margin, trace.worst_margin, drift.samples
    );
    let ok = weight_ok
        && drift.passed
        && trace.passed
        && drift.samples == C5_POINTS
        && drift.excluded == 0;
    report(5, "sir lyapunov", ok, &detail);
}

// ---------------------------------------------------------------------------
// 6. Lotka–Volterra threshold: with sigma = 1 the audit passes at the
//    default min a_ii = 1.0 > sigma^2/2 and fails at a11 = 0.4 < sigma^2/2.
// ---------------------------------------------------------------------------

const C6_RADIUS: f64 = 10.0;
const C6_POINTS: usize = 100_000;
const C6_TOL: f64 = 1e-9;

#[test]
fn criterion_06_lv3_threshold() {
    let above = build_model("lv3", &defaults()).unwrap();
    let (drift_above, _) = audit_lyapunov(&above, C6_RADIUS, C6_POINTS, SEED, C6_TOL).unwrap();

    let below = build_model("lv3", &overrides(&[("a11", 0.4)])).unwrap();
    let (drift_below, _) = audit_lyapunov(&below, C6_RADIUS, C6_POINTS, SEED, C6_TOL).unwrap();

    let detail = format!(
        "margin {:.3e} at min a_ii = 1.0 (must pass), margin {:.3e} at a11 = 0.4 (must fail)",
        drift_above.worst_margin, drift_below.worst_margin
    );
    let ok = drift_above.passed && !drift_below.passed && drift_below.worst_margin > C6_TOL;
    report(6, "lv3 coexistence threshold", ok, &detail);
}

// ---------------------------------------------------------------------------
// 7. LDP scaling trend on {x(1) >= 1} for Brownian motion: the exact
//    Gaussian tail gives eps*log P = -0.715 at eps = 0.1 and -0.558 at
//    eps = 0.02, approaching -I = -0.5; Monte Carlo at eps = 0.25 agrees
//    with the Gaussian tail within 4 standard errors.
// ---------------------------------------------------------------------------

const C7_EXACT_ROWS: [(f64, f64); 2] = [(0.1, -0.715), (0.02, -0.558)];
const C7_EXACT_TOL: f64 = 5e-4;
const C7_MC_EPS: f64 = 0.25;
const C7_MC_N: usize = 1_000_000;
const C7_MC_STEPS: usize = 128;
const C7_TIME_BUDGET_S: f64 = 120.0;
const C7_RATE: f64 = 0.5;

#[test]
fn criterion_07_ldp_scaling() {
    let start = Instant::now();

    // Exact-CDF rows: x(1) ~ N(0, eps), so P = Phi(-1/sqrt(eps)).
    let mut ok = true;
    let mut detail = String::new();
    let mut prev_gap = f64::INFINITY;
    for (eps, expected) in C7_EXACT_ROWS {
        let value = eps * gauss_upper_tail(1.0 / eps.sqrt()).ln();
        let gap = (value + C7_RATE).abs();
        ok &= (value - expected).abs() <= C7_EXACT_TOL && gap < prev_gap;
        detail.push_str(&format!("eps={eps}: eps*lnP = {value:.4} (want {expected}); "));
        prev_gap = gap;
    }

    // Monte Carlo row at eps = 0.25.
    let model = build_model("brownian", &defaults()).unwrap();
    let event = EventSpec::EndpointHalfspace {
        a: vec![1.0],
        c: 1.0,
    };
    let grid = TimeGrid::new(1.0, C7_MC_STEPS).unwrap();
    let rows = ldp_scaling_report(&model, &event, &[C7_MC_EPS], C7_MC_N, &grid, SEED, C7_RATE)
        .unwrap();
    let row = &rows[0];
    let p_exact = gauss_upper_tail(1.0 / C7_MC_EPS.sqrt()); // Phi(-2)
    let mc_err = (row.p_hat - p_exact).abs();
    let elapsed = start.elapsed().as_secs_f64();
    detail.push_str(&format!(
        "MC eps={C7_MC_EPS}: p_hat {:.6} vs {p_exact:.6} ({:.2} std errs); {elapsed:.1}s",
        row.p_hat,
        mc_err / row.std_err
    ));
    ok &= mc_err <= 4.0 * row.std_err && elapsed <= C7_TIME_BUDGET_S;
    report(7, "ldp scaling trend", ok, &detail);
}

// ---------------------------------------------------------------------------
// 8. Statement (ii): the exceedance fraction P(rho(Y^eps, x^h) >= delta) is
//    nonincreasing in eps on every registered model, and the Brownian rows
//    match the reflection-principle tail (with the Broadie–Glasserman–Kou
//    discrete-monitoring barrier shift) within 4 standard errors.
// ---------------------------------------------------------------------------

const C8_EPS: [f64; 3] = [0.1, 0.01, 0.001];
const C8_DELTA: f64 = 0.25;
const C8_N: usize = 10_000;
const C8_STEPS: usize = 2_048;
const C8_RADIUS: f64 = 10.0;
const C8_PASSAGE: f64 = C8_DELTA * C8_DELTA;
/// Barrier shift constant beta = -zeta(1/2)/sqrt(2*pi) for discretely
/// monitored extrema.
const C8_BGK_BETA: f64 = 0.5826;

/// P(sup_{[0,1]} |B| >= b) by the alternating reflection series.
fn two_sided_sup_tail(b: f64) -> f64 {
    let mut sum = 0.0;
    for k in 0..40u32 {
        let term = gauss_upper_tail((2 * k + 1) as f64 * b);
        if term == 0.0 {
            break;
        }
        sum += if k % 2 == 0 { term } else { -term };
    }
    4.0 * sum
}

#[test]
fn criterion_08_statement_ii() {
    let mut ok = true;
    let mut detail = String::new();
    for name in registered_models() {
        let model = build_model(name, &defaults()).unwrap();
        let grid = TimeGrid::new(model.horizon(), C8_STEPS).unwrap();
        let control = Control::zero(grid, model.noise_dim());
        let rows = convergence_statement_ii(
            &model, &control, &C8_EPS, C8_DELTA, C8_N, &grid, SEED, C8_RADIUS, C8_PASSAGE,
        )
        .unwrap();
        let fractions: Vec<f64> = rows.iter().map(|r| r.fraction_exceed).collect();
        let monotone = fractions.windows(2).all(|w| w[1] <= w[0]);
        ok &= monotone;
        if !monotone {
            detail.push_str(&format!("{name}: fractions {fractions:?} not monotone; "));
        }

        if *name == "brownian" {
            // Oracle: fraction = P(max_k sqrt(eps)|B_{t_k}| >= delta).
            let shift = C8_BGK_BETA * grid.dt().sqrt();
            for (row, &eps) in rows.iter().zip(&C8_EPS) {
                let p = two_sided_sup_tail(C8_DELTA / eps.sqrt() + shift);
                let se = (p * (1.0 - p) / C8_N as f64).sqrt().max(1.0 / C8_N as f64);
                let err = (row.fraction_exceed - p).abs();
                ok &= err <= 4.0 * se;
                detail.push_str(&format!(
                    "brownian eps={eps}: fraction {:.4} vs reflection {p:.4} \
                     ({:.2} std errs); ",
                    row.fraction_exceed,
                    err / se
                ));
            }
        }
    }
    report(8, "statement (ii) exceedance", ok, &detail);
}

// ---------------------------------------------------------------------------
// 9. Statement (i): for Brownian motion the sinusoid controls
//    h_n = sin(2*pi*n*t) give skeletons with sup distance 1/(pi*n) from the
//    zero-control limit, up to the discretization bound 2*dt*(1 + 2*pi*n).
// ---------------------------------------------------------------------------

const C9_STEPS: usize = 4_096;
const C9_MAX_INDEX: usize = 16;

#[test]
fn criterion_09_statement_i() {
    let model = build_model("brownian", &defaults()).unwrap();
    let grid = TimeGrid::new(1.0, C9_STEPS).unwrap();
    let indices: Vec<usize> = (1..=C9_MAX_INDEX).collect();
    let family = sinusoid_family(grid, &indices, &[1.0]).unwrap();
    let limit = Control::zero(grid, 1);
    let rows = weak_convergence_statement_i(&model, &family, &limit, &grid).unwrap();
    let dt = grid.dt();
    let mut ok = rows.len() == C9_MAX_INDEX;
    let mut worst = (0usize, 0.0f64);
    for row in &rows {
        let n = row.index as f64;
        let exact = 1.0 / (std::f64::consts::PI * n);
        let bound = 2.0 * dt * (1.0 + 2.0 * std::f64::consts::PI * n);
        let err = (row.distance - exact).abs();
        if err / bound > worst.1 {
            worst = (row.index, err / bound);
        }
        ok &= err <= bound;
    }
    let detail = format!(
        "{} indices; worst error at n = {} uses {:.0}% of its bound",
        rows.len(),
        worst.0,
        100.0 * worst.1
    );
    report(9, "statement (i) weak convergence", ok, &detail);
}

// ---------------------------------------------------------------------------
// 10. Numerical hygiene: adjoint gradients vs central finite differences
//     (20 probes per model), eps = 0 degeneracy to the skeleton, and
//     bit-identical results across thread counts.
// ---------------------------------------------------------------------------

const C10_PROBES: usize = 20;
const C10_FD_STEPS: usize = 16;
const C10_FD_STEP: f64 = 1e-6;
const C10_FD_REL_TOL: f64 = 1e-4;
const C10_DEGENERACY_TOL: f64 = 1e-12;

/// Penalty objective 0.5 * ||h||^2 + mu * dist(x^h(T))^2 evaluated directly.
fn penalty_objective(
    model: &ModelSpec,
    values: &[f64],
    grid: &TimeGrid,
    target: &TargetSpec,
    mu: f64,
) -> f64 {
    let control = Control::new(*grid, model.noise_dim(), values.to_vec()).unwrap();
    let path = solve_skeleton(model, &control, grid).unwrap();
    let dist = target.distance(path.endpoint());
    0.5 * control.energy() + mu * dist * dist
}

fn fd_probe_ok(model: &ModelSpec, probe: usize) -> Result<(), String> {
    let grid = TimeGrid::new(model.horizon(), C10_FD_STEPS).unwrap();
    let m = model.noise_dim();
    let values: Vec<f64> = (0..C10_FD_STEPS * m)
        .map(|i| 0.6 * (1.7 * (i + 1) as f64 + 0.9 * (probe + 1) as f64).sin())
        .collect();
    let z: Vec<f64> = model
        .x0()
        .iter()
        .enumerate()
        .map(|(i, x)| x * 1.5 + 0.25 / (i + 1) as f64)
        .collect();
    let target = TargetSpec::point(z, 1e-6);
    let mu = if probe.is_multiple_of(2) { 0.0 } else { 5.0 };
    let control = Control::new(grid, m, values.clone()).unwrap();
    let grad = fwldp::adjoint_gradient(model, &control, &target, mu)
        .map_err(|e| format!("adjoint failed: {e}"))?;
    for i in 0..values.len() {
        let mut vp = values.clone();
        let mut vm = values.clone();
        vp[i] += C10_FD_STEP;
        vm[i] -= C10_FD_STEP;
        let fd = (penalty_objective(model, &vp, &grid, &target, mu)
            - penalty_objective(model, &vm, &grid, &target, mu))
            / (2.0 * C10_FD_STEP);
        let denom = fd.abs().max(grad[i].abs()).max(1e-8);
        let rel = (fd - grad[i]).abs() / denom;
        if rel > C10_FD_REL_TOL {
            return Err(format!(
                "{} probe {probe} comp {i}: fd {fd:.9e} vs adjoint {:.9e} (rel {rel:.2e})",
                model.name(),
                grad[i]
            ));
        }
    }
    Ok(())
}

#[test]
fn criterion_10_numerical_hygiene() {
    let mut ok = true;
    let mut detail = String::new();

    // (a) Adjoint gradients match finite differences, 20 probes per model.
    for name in registered_models() {
        let model = build_model(name, &defaults()).unwrap();
        for probe in 0..C10_PROBES {
            if let Err(e) = fd_probe_ok(&model, probe) {
                ok = false;
                detail.push_str(&e);
                detail.push_str("; ");
                break;
            }
        }
    }

    // (b) eps = 0 simulators coincide with the skeleton solver.
    for name in registered_models() {
        let model = build_model(name, &defaults()).unwrap();
        let grid = TimeGrid::new(model.horizon(), 256).unwrap();
        let control = Control::sinusoid(grid, 2.0, &vec![0.4; model.noise_dim()]).unwrap();
        let controlled = simulate_controlled(&model, 0.0, &control, &grid, SEED).unwrap();
        let skeleton = solve_skeleton(&model, &control, &grid).unwrap();
        let gap_controlled = uniform_distance(&controlled, &skeleton).unwrap();
        let sde = simulate_sde(&model, 0.0, &grid, SEED).unwrap();
        let zero_skeleton =
            solve_skeleton(&model, &Control::zero(grid, model.noise_dim()), &grid).unwrap();
        let gap_sde = uniform_distance(&sde, &zero_skeleton).unwrap();
        if gap_controlled > C10_DEGENERACY_TOL || gap_sde > C10_DEGENERACY_TOL {
            ok = false;
            detail.push_str(&format!(
                "{name}: eps=0 gaps {gap_controlled:.2e} / {gap_sde:.2e}; "
            ));
        }
    }

    // (c) Identical seeds are bit-identical for any thread count.
    let model = build_model("lv3", &defaults()).unwrap();
    let grid = TimeGrid::new(1.0, 64).unwrap();
    let event = EventSpec::ExitBall { radius: 2.0 };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let est =
                    estimate_rare_event(&model, &event, &[0.5, 0.1], 20_000, &grid, SEED).unwrap();
                let conv = convergence_statement_ii(
                    &model,
                    &Control::zero(grid, model.noise_dim()),
                    &[0.5, 0.1],
                    0.25,
                    5_000,
                    &grid,
                    SEED,
                    10.0,
                    0.25,
                )
                .unwrap();
                let mut bits = Vec::new();
                for e in &est {
                    bits.push(e.hits as u64);
                    bits.push(e.p_hat.to_bits());
                    bits.push(e.std_err.to_bits());
                }
                for c in &conv {
                    bits.push(c.fraction_exceed.to_bits());
                    bits.push(c.mean_rho.to_bits());
                    bits.push(c.max_rho.to_bits());
                    bits.push(c.mean_tau_radius.to_bits());
                }
                bits
            })
    };
    let single = run(1);
    let quad = run(4);
    let seven = run(7);
    if single != quad || single != seven {
        ok = false;
        detail.push_str("thread counts 1/4/7 disagree bitwise; ");
    }

    // A sanity anchor so the criterion cannot vacuously pass: the probe
    // objective at the zero control is the pure penalty term.
    let brownian = build_model("brownian", &defaults()).unwrap();
    let grid16 = TimeGrid::new(1.0, C10_FD_STEPS).unwrap();
    let zero = vec![0.0; C10_FD_STEPS];
    let obj = penalty_objective(
        &brownian,
        &zero,
        &grid16,
        &TargetSpec::point(vec![1.0], 1e-6),
        3.0,
    );
    ok &= (obj - 3.0).abs() <= 1e-12;

    report(
        10,
        "numerical hygiene",
        ok,
        if detail.is_empty() { "-" } else { &detail },
    );
}

// ---------------------------------------------------------------------------
// Shared sanity: the action functional used throughout is 0.5 * energy.
// ---------------------------------------------------------------------------

#[test]
fn action_functional_is_half_energy() {
    let grid = TimeGrid::new(1.0, 8).unwrap();
    let h = Control::constant(grid, &[2.0]).unwrap();
    assert_eq!(action_functional(&h), 0.5 * h.energy());
}
