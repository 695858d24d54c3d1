use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::errors::ErrorReport;

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub label: String,
    pub report: ErrorReport,
    /// Broken `H1` rate against the previous row with the same label and order.
    pub rate: Option<f64>,
}

/// Least-squares slope of `y` against `x`; `None` for fewer than two points.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Algebraic rate `p` in `err ~ h^p`.
pub fn fit_h_rate(h: &[f64], err: &[f64]) -> Option<f64> {
    let lx: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    least_squares_slope(&lx, &ly)
}

/// Per-order reduction factor `q` in `err ~ C q^k`.
pub fn fit_k_decay(k: &[usize], err: &[f64]) -> Option<f64> {
    let kx: Vec<f64> = k.iter().map(|&v| v as f64).collect();
    let ly: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    least_squares_slope(&kx, &ly).map(f64::exp)
}

/// Builds rows and fills local rates between consecutive refinements.
pub fn convergence_rows(cases: Vec<(String, ErrorReport)>) -> Vec<ConvergenceRow> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(cases.len());
    for (label, report) in cases {
        let rate = rows
            .iter()
            .rev()
            .find(|r| r.label == label && r.report.k == report.k)
            .filter(|r| r.report.h != report.h)
            .map(|r| (r.report.h1_u / report.h1_u).ln() / (r.report.h / report.h).ln());
        rows.push(ConvergenceRow { label, report, rate });
    }
    rows
}

/// Error table as CSV; the trailing `case` column names the discretization of each row.
pub fn errors_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("k,h,ndof,err_l2_u,err_h1_u,err_triple,err_l2_p,rate,case\n");
    for r in rows {
        let e = &r.report;
        let _ = writeln!(
            s,
            "{},{:.6e},{},{:.6e},{:.6e},{:.6e},{:.6e},{},{}",
            e.k,
            e.h,
            e.ndof,
            e.l2_u,
            e.h1_u,
            e.triple_u,
            e.l2_p,
            r.rate.map(|v| format!("{v:.4}")).unwrap_or_default(),
            r.label
        );
    }
    s
}

/// Aligned plain-text rendering.
pub fn render_table(rows: &[ConvergenceRow]) -> String {
    let mut s = format!(
        "{:<10} {:>3} {:>10} {:>8} {:>11} {:>11} {:>11} {:>11} {:>7}\n",
        "case", "k", "h", "ndof", "L2(u)", "H1(u)", "triple(u)", "L2(p)", "rate"
    );
    for r in rows {
        let e = &r.report;
        let _ = writeln!(
            s,
            "{:<10} {:>3} {:>10.4e} {:>8} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>7}",
            r.label,
            e.k,
            e.h,
            e.ndof,
            e.l2_u,
            e.h1_u,
            e.triple_u,
            e.l2_p,
            r.rate.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into())
        );
    }
    s
}
