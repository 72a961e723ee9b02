//! CSV and JSON emission for every result type, plus exact round-trip
//! parsing.
//!
//! Numbers are written as `{:.16e}` — 17 significant decimal digits — which
//! round-trips every finite f64 bit-exactly through `str::parse`.  Optional
//! cells (e.g. ε·log p̂ on zero-hit rows) are empty fields.  Variable-length
//! coordinate lists (audit worst points) are semicolon-joined inside one
//! field so the column layout stays fixed.  Output contains no timestamps or
//! environment details: rerunning a command must produce byte-identical
//! files.

use crate::action::RateResult;
use crate::grid::{Control, GridError, Path, PathLabel, TimeGrid};
use crate::mc::{ConvergenceRow, MCEstimate, ScalingRow, WeakRow};
use crate::verify::AuditReport;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("empty CSV document")]
    Empty,
    #[error("line {line}: expected {expected} fields, got {got}")]
    FieldCount {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: cannot parse `{text}` as a number")]
    BadNumber { line: usize, text: String },
    #[error("line {line}: cannot parse `{text}` as a boolean")]
    BadBool { line: usize, text: String },
    #[error("expected {expected} data rows, got {got}")]
    RowCount { expected: usize, got: usize },
    #[error("header mismatch: expected `{expected}`, got `{got}`")]
    Header { expected: String, got: String },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Full-precision text for one value: 17 significant digits, exact
/// round-trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn join_coords(coords: &[f64]) -> String {
    coords.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(";")
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

/// Path CSV: `t,x1..xd`, one row per grid node.
pub fn path_to_csv(path: &Path) -> String {
    let d = path.dim();
    let mut out = String::from("t");
    for i in 1..=d {
        out.push_str(&format!(",x{i}"));
    }
    out.push('\n');
    let grid = path.grid();
    for k in 0..path.nodes() {
        out.push_str(&fmt_f64(grid.node(k)));
        for v in path.state(k) {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

/// Control CSV: `t,h1..hm`, one row per step (value at the left node).
pub fn control_to_csv(control: &Control) -> String {
    let m = control.dim();
    let mut out = String::from("t");
    for j in 1..=m {
        out.push_str(&format!(",h{j}"));
    }
    out.push('\n');
    let grid = control.grid();
    for k in 0..grid.steps() {
        out.push_str(&fmt_f64(grid.node(k)));
        for v in control.value(k) {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

const AUDIT_HEADER: &str =
    "assumption,samples,worst_margin,tolerance,passed,excluded,extremum,worst_point";

/// Audit CSV: one row per report; worst-point coordinates semicolon-joined.
pub fn audits_to_csv(reports: &[AuditReport]) -> String {
    let mut out = String::from(AUDIT_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.assumption.label(),
            r.samples,
            fmt_f64(r.worst_margin),
            fmt_f64(r.tolerance),
            r.passed,
            r.excluded,
            fmt_opt(r.extremum),
            join_coords(&r.worst_point),
        ));
    }
    out
}

const RATE_HEADER: &str =
    "action,terminal_error,iterations,converged,penalty_final,status,grad_norm";

/// Rate CSV: the scalar summary row (the minimizer control is emitted
/// separately in the control format).
pub fn rate_to_csv(result: &RateResult) -> String {
    format!(
        "{RATE_HEADER}\n{},{},{},{},{},{},{}\n",
        fmt_f64(result.action),
        fmt_f64(result.terminal_error),
        result.iterations,
        result.converged,
        fmt_f64(result.penalty_final),
        result.status.label(),
        fmt_f64(result.grad_norm),
    )
}

const ESTIMATE_HEADER: &str = "epsilon,n,hits,blowups,p_hat,std_err,eps_log_p";

pub fn estimates_to_csv(rows: &[MCEstimate]) -> String {
    let mut out = String::from(ESTIMATE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(r.epsilon),
            r.n,
            r.hits,
            r.blowups,
            fmt_f64(r.p_hat),
            fmt_f64(r.std_err),
            fmt_opt(r.eps_log_p),
        ));
    }
    out
}

const SCALING_HEADER: &str =
    "epsilon,n,hits,blowups,p_hat,std_err,eps_log_p,neg_rate,gap,p_upper_95";

pub fn scaling_to_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from(SCALING_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            fmt_f64(r.epsilon),
            r.n,
            r.hits,
            r.blowups,
            fmt_f64(r.p_hat),
            fmt_f64(r.std_err),
            fmt_opt(r.eps_log_p),
            fmt_f64(r.neg_rate),
            fmt_opt(r.gap),
            fmt_opt(r.p_upper_95),
        ));
    }
    out
}

const CONVERGENCE_HEADER: &str = "epsilon,n,excluded,fraction_exceed,mean_rho,max_rho,\
frac_tau_radius,mean_tau_radius,frac_tau_passage,mean_tau_passage";

pub fn convergence_to_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from(CONVERGENCE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            fmt_f64(r.epsilon),
            r.n,
            r.excluded,
            fmt_f64(r.fraction_exceed),
            fmt_f64(r.mean_rho),
            fmt_f64(r.max_rho),
            fmt_f64(r.frac_tau_radius),
            fmt_f64(r.mean_tau_radius),
            fmt_f64(r.frac_tau_passage),
            fmt_f64(r.mean_tau_passage),
        ));
    }
    out
}

const WEAK_HEADER: &str = "index,distance";

pub fn weak_to_csv(rows: &[WeakRow]) -> String {
    let mut out = String::from(WEAK_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{}\n", r.index, fmt_f64(r.distance)));
    }
    out
}

/// JSON mirror: the same rows as an array of records (serde field names).
pub fn to_json<T: Serialize>(rows: &T) -> String {
    serde_json::to_string_pretty(rows).expect("result types serialize infallibly")
}

// ---------------------------------------------------------------------------
// Parsers (exact round-trip)
// ---------------------------------------------------------------------------

/// A parsed CSV document: header fields plus rows of string fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Split a CSV document produced by this module (no quoting or escapes).
pub fn parse_csv(text: &str) -> Result<CsvTable, IoError> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or(IoError::Empty)?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        if fields.len() != header.len() {
            return Err(IoError::FieldCount {
                line: idx + 2,
                expected: header.len(),
                got: fields.len(),
            });
        }
        rows.push(fields);
    }
    Ok(CsvTable { header, rows })
}

fn parse_f64(text: &str, line: usize) -> Result<f64, IoError> {
    text.parse::<f64>().map_err(|_| IoError::BadNumber {
        line,
        text: text.to_string(),
    })
}

/// Rebuild a path from its CSV (states only; `grid` supplies the exact
/// horizon the text cannot encode losslessly).
pub fn path_from_csv(text: &str, grid: TimeGrid, label: PathLabel) -> Result<Path, IoError> {
    let table = parse_csv(text)?;
    let nodes = grid.steps() + 1;
    if table.rows.len() != nodes {
        return Err(IoError::RowCount {
            expected: nodes,
            got: table.rows.len(),
        });
    }
    let dim = table.header.len() - 1;
    let mut states = Vec::with_capacity(nodes * dim);
    for (i, row) in table.rows.iter().enumerate() {
        for field in &row[1..] {
            states.push(parse_f64(field, i + 2)?);
        }
    }
    Ok(Path::from_states(grid, dim, states, label))
}

/// Rebuild a control from its CSV on the given grid.
pub fn control_from_csv(text: &str, grid: TimeGrid) -> Result<Control, IoError> {
    let table = parse_csv(text)?;
    if table.rows.len() != grid.steps() {
        return Err(IoError::RowCount {
            expected: grid.steps(),
            got: table.rows.len(),
        });
    }
    let dim = table.header.len() - 1;
    let mut values = Vec::with_capacity(grid.steps() * dim);
    for (i, row) in table.rows.iter().enumerate() {
        for field in &row[1..] {
            values.push(parse_f64(field, i + 2)?);
        }
    }
    Ok(Control::new(grid, dim, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{simulate_sde, solve_skeleton};
    use crate::mc::{estimate_rare_event, EventSpec};
    use crate::registry::build_model;
    use crate::verify::audit_monotonicity;
    use std::collections::BTreeMap;

    fn none() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    #[test]
    fn fmt_round_trips_awkward_values() {
        for v in [
            0.0,
            -0.0,
            1.0 / 3.0,
            0.1,
            std::f64::consts::PI * 1e300,
            5e-324,
            -1.0e-308,
            f64::MAX,
            f64::MIN_POSITIVE,
            (1.0f64).next_up(),
        ] {
            let parsed: f64 = fmt_f64(v).parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits(), "value {v:e}");
        }
        assert!(fmt_f64(f64::NAN).parse::<f64>().unwrap().is_nan());
        assert_eq!(
            fmt_f64(f64::INFINITY).parse::<f64>().unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn path_csv_round_trips_bit_exactly() {
        let model = build_model("lv3", &none()).unwrap();
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let path = simulate_sde(&model, 0.3, &grid, 99).unwrap();
        let text = path_to_csv(&path);
        assert!(text.starts_with("t,x1,x2,x3\n"));
        let back = path_from_csv(&text, grid, path.label()).unwrap();
        assert_eq!(back.states_raw().len(), path.states_raw().len());
        for (a, b) in back.states_raw().iter().zip(path.states_raw()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn control_csv_round_trips_bit_exactly() {
        let grid = TimeGrid::new(2.0, 48).unwrap();
        let control = Control::sinusoid(grid, 3.0, &[0.45, -1.25]).unwrap();
        let text = control_to_csv(&control);
        assert!(text.starts_with("t,h1,h2\n"));
        let back = control_from_csv(&text, grid).unwrap();
        for (a, b) in back.values_raw().iter().zip(control.values_raw()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.energy().to_bits(), control.energy().to_bits());
    }

    #[test]
    fn audit_csv_parses_and_reproduces_margin() {
        let model = build_model("holder13", &none()).unwrap();
        let report = audit_monotonicity(&model, 5.0, 500, 3, 0.0).unwrap();
        let text = audits_to_csv(std::slice::from_ref(&report));
        let table = parse_csv(&text).unwrap();
        assert_eq!(table.header.len(), 8);
        assert_eq!(table.rows.len(), 1);
        let margin: f64 = table.rows[0][2].parse().unwrap();
        assert_eq!(margin.to_bits(), report.worst_margin.to_bits());
        let coords: Vec<f64> = table.rows[0][7]
            .split(';')
            .map(|c| c.parse().unwrap())
            .collect();
        assert_eq!(coords.len(), report.worst_point.len());
        for (a, b) in coords.iter().zip(&report.worst_point) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn estimate_csv_has_empty_cell_for_zero_hits() {
        let model = build_model("brownian", &none()).unwrap();
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let event = EventSpec::EndpointHalfspace {
            a: vec![1.0],
            c: 50.0,
        };
        let rows = estimate_rare_event(&model, &event, &[0.01], 50, &grid, 1).unwrap();
        let text = estimates_to_csv(&rows);
        let table = parse_csv(&text).unwrap();
        assert_eq!(table.rows[0][6], "", "zero hits leave eps_log_p empty");
        assert_eq!(table.rows[0][2], "0");
    }

    #[test]
    fn writers_are_deterministic() {
        let model = build_model("sir", &none()).unwrap();
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let control = Control::constant(grid, &[0.1]).unwrap();
        let a = path_to_csv(&solve_skeleton(&model, &control, &grid).unwrap());
        let b = path_to_csv(&solve_skeleton(&model, &control, &grid).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn json_mirrors_rows() {
        let model = build_model("brownian", &none()).unwrap();
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let event = EventSpec::EndpointHalfspace {
            a: vec![1.0],
            c: 0.0,
        };
        let rows = estimate_rare_event(&model, &event, &[0.5], 20, &grid, 2).unwrap();
        let json = to_json(&rows);
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed[0]["n"], 20);
        assert_eq!(parsed[0]["epsilon"], 0.5);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(matches!(parse_csv(""), Err(IoError::Empty)));
        let ragged = "a,b\n1.0\n";
        assert!(matches!(
            parse_csv(ragged),
            Err(IoError::FieldCount { line: 2, .. })
        ));
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let bad = "t,h1\n0.0,abc\n0.25,1\n0.5,1\n0.75,1\n";
        assert!(matches!(
            control_from_csv(bad, grid),
            Err(IoError::BadNumber { .. })
        ));
        let short = "t,h1\n0.0,1.0\n";
        assert!(matches!(
            control_from_csv(short, grid),
            Err(IoError::RowCount {
                expected: 4,
                got: 1
            })
        ));
    }
}
