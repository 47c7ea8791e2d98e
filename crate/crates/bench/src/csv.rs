//! CSV output.
//!
//! One row per trace record. Reals print with 17 significant digits so the
//! table round-trips bit-exactly; optional columns (log gap without a
//! reference, estimation error without a truth) are left empty.

use std::fmt::Write as _;

use crate::run::MetricRow;

pub const CSV_HEADER: &str =
    "solver,seed,eta,iter,passes,seconds,objective,log_gap,estimation_error,ht_ops,grad_evals,best";

pub fn emit_csv(rows: &[MetricRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        format_row(&mut out, row);
        out.push('\n');
    }
    out
}

fn format_row(out: &mut String, r: &MetricRow) {
    write!(
        out,
        "{},{},{:.16e},{},{:.16e},{:.16e},{:.16e},",
        r.solver, r.seed, r.eta, r.iter, r.passes, r.seconds, r.objective
    )
    .unwrap();
    if let Some(g) = r.log_gap {
        write!(out, "{g:.16e}").unwrap();
    }
    out.push(',');
    if let Some(e) = r.estimation_error {
        write!(out, "{e:.16e}").unwrap();
    }
    write!(
        out,
        ",{},{},{}",
        r.ht_ops,
        r.grad_evals,
        if r.best { 1 } else { 0 }
    )
    .unwrap();
}
