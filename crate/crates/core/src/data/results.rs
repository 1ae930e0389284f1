//! Result tables: one CSV row per (dataset, algorithm), preceded by the run
//! configuration as `# key=value` comment lines.

use crate::error::{Error, Result};
use crate::regret::RegretLedger;

pub const COLUMNS: [&str; 15] = [
    "dataset",
    "algorithm",
    "scale_factor",
    "R",
    "lambda",
    "seed",
    "T",
    "cumulative_loss",
    "comparator_loss",
    "comparator_converged",
    "regret",
    "regret_per_round",
    "avg_hinge_loss",
    "mistake_fraction",
    "wall_ms",
];

#[derive(Clone, Debug)]
pub struct ResultRow {
    pub dataset: String,
    pub algorithm: String,
    pub scale_factor: f64,
    /// Box radius; `None` for unconstrained learners.
    pub radius: Option<f64>,
    pub lambda: Option<f64>,
    pub seed: u64,
    pub ledger: RegretLedger,
    pub avg_hinge_loss: Option<f64>,
    pub mistake_fraction: Option<f64>,
    pub wall_ms: Option<f64>,
}

/// `%.6g`: six significant digits, trailing zeros removed, exponent form
/// outside `1e-4 <= |x| < 1e6`.
pub fn format_sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    // Round first so the exponent reflects carries (9.999996 -> 10).
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig6).unwrap_or_default()
}

/// Render rows under a header block echoing `config`. Rows whose ledger has
/// neither a comparator nor an explicit waiver are refused.
pub fn write_results_csv(rows: &[ResultRow], config: &[(String, String)]) -> Result<String> {
    if let Some(r) = rows.iter().find(|r| !r.ledger.is_resolved()) {
        return Err(Error::Unresolved(format!("{}/{}", r.dataset, r.algorithm)));
    }
    let mut out = String::new();
    for (k, v) in config {
        out.push_str(&format!("# {k}={v}\n"));
    }
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for r in rows {
        let comparator = r.ledger.comparator();
        w.write_record([
            r.dataset.clone(),
            r.algorithm.clone(),
            format_sig6(r.scale_factor),
            opt(r.radius),
            opt(r.lambda),
            r.seed.to_string(),
            r.ledger.rounds().to_string(),
            format_sig6(r.ledger.cumulative_loss()),
            opt(comparator.map(|c| c.loss)),
            comparator.map(|c| c.converged.to_string()).unwrap_or_default(),
            opt(r.ledger.regret()),
            opt(r.ledger.regret_per_round()),
            opt(r.avg_hinge_loss),
            opt(r.mistake_fraction),
            opt(r.wall_ms),
        ])?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regret::Comparator;
    use crate::sparse::SparseVector;

    #[test]
    fn sig6_matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (3.14159265, "3.14159"),
            (9.9999996, "10"),
            (999999.6, "1e+06"),
            (1e100, "1e+100"),
            (0.1 + 0.2, "0.3"),
        ];
        for (x, s) in cases {
            assert_eq!(format_sig6(x), s, "{x}");
        }
    }

    fn row(alg: &str, ledger: RegretLedger) -> ResultRow {
        ResultRow {
            dataset: "d".into(),
            algorithm: alg.into(),
            scale_factor: 0.1,
            radius: Some(1.0),
            lambda: None,
            seed: 7,
            ledger,
            avg_hinge_loss: None,
            mistake_fraction: Some(0.25),
            wall_ms: None,
        }
    }

    fn resolved(losses: &[f64], comparator: f64) -> RegretLedger {
        let mut l = RegretLedger::new();
        for &x in losses {
            l.record(x, None);
        }
        l.resolve(Comparator::exact(SparseVector::new(), comparator));
        l
    }

    #[test]
    fn two_rows_and_header() {
        let rows = vec![
            row("global", resolved(&[1.0, 2.0, 3.0, 4.0], 6.0)),
            row("per-coord", resolved(&[1.0, 1.0, 1.0, 1.0], 2.0)),
        ];
        let cfg = vec![("experiment".to_string(), "logreg".to_string())];
        let csv = write_results_csv(&rows, &cfg).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# experiment=logreg");
        assert_eq!(lines[1], COLUMNS.join(","));
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], "d,global,0.1,1,,7,4,10,6,true,4,1,,0.25,");
        assert_eq!(lines[3], "d,per-coord,0.1,1,,7,4,4,2,true,2,0.5,,0.25,");
    }

    #[test]
    fn unresolved_is_refused() {
        let rows = vec![row("pa", RegretLedger::new())];
        match write_results_csv(&rows, &[]) {
            Err(Error::Unresolved(name)) => assert_eq!(name, "d/pa"),
            other => panic!("{other:?}"),
        }
        let mut waived = RegretLedger::new();
        waived.waive_comparator();
        let csv = write_results_csv(&[row("pa", waived)], &[]).unwrap();
        assert!(csv.lines().nth(1).unwrap().starts_with("d,pa,0.1,1,,7,0,0,,,,,"));
    }
}
