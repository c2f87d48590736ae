//! Structured-text writers for fit results and evaluation reports.

use std::fmt::Write as _;

use crate::evaluation::EvaluationReport;
use crate::identification::{ConstraintSet, FitResult};
use crate::workbench::dataset::fmt_g17;

pub const FIT_HEADER: &str = "greyhull-fit v1";
pub const REPORT_HEADER: &str = "greyhull-report v1";

fn join_g17(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| fmt_g17(*v))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders a fit result, including the per-row nonzero violations labeled
/// by constraint family and grid point.
pub fn fit_result_text(
    vessel: &str,
    result: &FitResult<f64>,
    p_init: &[f64; 11],
    constraints: &ConstraintSet<f64>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FIT_HEADER}");
    let _ = writeln!(out, "vessel {vessel}");
    let _ = writeln!(out, "termination {}", result.termination.name());
    let _ = writeln!(out, "iterations {}", result.iterations);
    let _ = writeln!(out, "initial-objective {}", fmt_g17(result.initial_objective));
    let _ = writeln!(out, "final-objective {}", fmt_g17(result.final_objective));
    let _ = writeln!(out, "max-violation {}", fmt_g17(result.max_violation()));
    let _ = writeln!(out, "p-init {}", join_g17(p_init));
    let _ = writeln!(out, "p-star {}", join_g17(&result.p_star.p));
    for (k, value) in result.objective_trace.iter().enumerate() {
        let _ = writeln!(out, "trace {k} {}", fmt_g17(*value));
    }
    for (i, cost) in result.per_trajectory_costs.iter().enumerate() {
        let _ = writeln!(out, "trajectory-cost {i} {}", fmt_g17(*cost));
    }
    let rows = constraints.rows();
    for (row, v) in rows.iter().zip(result.final_violations.iter()) {
        if *v > 0.0 {
            let _ = writeln!(out, "violation {} {}", row.label(), fmt_g17(*v));
        }
    }
    out
}

fn opt_g17(value: Option<f64>) -> String {
    value.map_or_else(|| "undefined".to_string(), fmt_g17)
}

/// Renders an evaluation report.
pub fn evaluation_report_text(vessel: &str, report: &EvaluationReport<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{REPORT_HEADER}");
    let _ = writeln!(out, "vessel {vessel}");
    let _ = writeln!(out, "scenarios {}", report.scenarios.len());
    let _ = writeln!(out, "mari-percent {}", opt_g17(report.mari));
    let _ = writeln!(
        out,
        "cvdm-improvement-percent {}",
        opt_g17(report.cvdm_improvement)
    );
    let _ = writeln!(out, "consistency-percent {}", opt_g17(report.consistency));
    for flag in &report.flags {
        let _ = writeln!(out, "flag {flag}");
    }
    for (i, s) in report.scenarios.iter().enumerate() {
        let _ = writeln!(
            out,
            "scenario {i} cvdm-baseline {} cvdm-fitted {} improvement-percent {}",
            fmt_g17(s.cvdm_baseline),
            fmt_g17(s.cvdm_fitted),
            opt_g17(s.cvdm_improvement)
        );
        let _ = writeln!(out, "scenario {i} md-baseline {}", join_g17(&s.md_baseline));
        let _ = writeln!(out, "scenario {i} md-fitted {}", join_g17(&s.md_fitted));
        let fields: Vec<String> = s
            .md_improvement
            .iter()
            .map(|v| v.map_or_else(|| "excluded".to_string(), fmt_g17))
            .collect();
        let _ = writeln!(
            out,
            "scenario {i} md-improvement-percent {}",
            fields.join(" ")
        );
    }
    out
}

/// Flat one-row-per-scenario table for plotting.
pub fn evaluation_table_text(report: &EvaluationReport<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "scenario\tcvdm_baseline\tcvdm_fitted\tcvdm_improvement_pct\tari_pct"
    );
    for (i, s) in report.scenarios.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i}\t{}\t{}\t{}\t{}",
            fmt_g17(s.cvdm_baseline),
            fmt_g17(s.cvdm_fitted),
            s.cvdm_improvement.map_or_else(|| "nan".into(), fmt_g17),
            s.average_relative_improvement
                .map_or_else(|| "nan".into(), fmt_g17),
        );
    }
    out
}
