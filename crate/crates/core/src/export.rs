//! CSV and JSON export of estimator reports.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::stats::EstimatorReport;

pub const CSV_HEADER: &str = "name,lambda,n,mean,std_error,ci_lo,ci_hi,theory,seed";

/// Reports as CSV; floats use the shortest representation that round-trips.
pub fn to_csv(reports: &[EstimatorReport]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in reports {
        let theory = r.theory.map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.name, r.lambda, r.n, r.mean, r.std_error, r.ci95[0], r.ci95[1], theory, r.seed
        );
    }
    s
}

pub fn to_json(reports: &[EstimatorReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}

pub fn from_json(s: &str) -> Result<Vec<EstimatorReport>> {
    Ok(serde_json::from_str(s)?)
}

/// Write `reports` to `path`, as JSON when the extension is `.json` and CSV otherwise.
pub fn export(reports: &[EstimatorReport], path: &Path) -> Result<()> {
    let text = if path.extension().is_some_and(|e| e == "json") { to_json(reports)? } else { to_csv(reports) };
    std::fs::write(path, text)?;
    Ok(())
}
