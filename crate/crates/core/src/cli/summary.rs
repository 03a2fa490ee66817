//! Fixed-width text summary of a [`DualityReport`].

use std::fmt::Write;

use crate::duality::DualityReport;

/// `x` with six significant digits; `-` when absent.
pub fn six_digits(x: Option<f64>) -> String {
    let Some(x) = x else {
        return "-".to_string();
    };
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.00000".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..6).contains(&magnitude) {
        let decimals = (5 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

pub fn emit_summary(report: &DualityReport) -> String {
    if report.checks.is_empty() {
        return "no checks requested\n".to_string();
    }
    let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0).max(5);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>14}  {:>14}  verdict",
        "check", "statistic", "threshold"
    );
    for check in &report.checks {
        let (stat, threshold) = check.result.statistic_and_threshold();
        let _ = writeln!(
            out,
            "{:<width$}  {:>14}  {:>14}  {}",
            check.name,
            six_digits(stat),
            six_digits(threshold),
            check.verdict
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::{ks_verdict, CheckRecord, CheckResult, DualityReport};

    #[test]
    fn significant_digits() {
        assert_eq!(six_digits(Some(0.00727813456)), "0.00727813");
        assert_eq!(six_digits(Some(3.0)), "3.00000");
        assert_eq!(six_digits(Some(123456.7)), "123457");
        assert_eq!(six_digits(Some(1234567.0)), "1.23457e6");
        assert_eq!(six_digits(Some(1.5e-7)), "1.50000e-7");
        assert_eq!(six_digits(None), "-");
    }

    #[test]
    fn empty_report() {
        assert_eq!(
            emit_summary(&DualityReport::from_checks(vec![])),
            "no checks requested\n"
        );
    }

    #[test]
    fn rows_carry_verdicts() {
        let report = DualityReport::from_checks(vec![CheckRecord::new(
            "distribution_duality",
            CheckResult::Distribution(ks_verdict(&[1.0, 2.0], &[1.0, 2.0], 0.01)),
        )]);
        let text = emit_summary(&report);
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().ends_with("PASS"), "{text}");
    }
}
