//! Machine-readable output writers. Formats are frozen:
//!
//! * Verification reports: JSON lines, one object per check with schema
//!   `{v, name, status, kind, margin, tolerance, trials, seed, witness?,
//!   elapsed_s}`; or a CSV table of the scalar columns.
//! * Experiment tables: CSV with a `# v=1` version comment, a mandatory
//!   header row `t,empirical,stderr,bound,pass`, '.' decimal separator,
//!   ',' field separator, LF line endings; or a single JSON object.
//!
//! `elapsed_s` is written as 0 unless timings were requested, so identical
//! (config, seed) runs produce byte-identical files.

use carre::runner::ExperimentTable;
use carre::verify::VerificationReport;

pub const FORMAT_VERSION: u32 = 1;

fn sanitized(report: &VerificationReport, timings: bool) -> VerificationReport {
    let mut out = report.clone();
    if !timings {
        out.elapsed_s = 0.0;
    }
    out
}

pub fn reports_jsonl(reports: &[VerificationReport], timings: bool) -> String {
    let mut text = String::new();
    for report in reports {
        let mut value = serde_json::to_value(sanitized(report, timings))
            .expect("reports serialize infallibly");
        value
            .as_object_mut()
            .expect("report is an object")
            .insert("v".into(), serde_json::json!(FORMAT_VERSION));
        text.push_str(&value.to_string());
        text.push('\n');
    }
    text
}

pub fn reports_csv(reports: &[VerificationReport], timings: bool) -> String {
    let mut text = format!("# v={FORMAT_VERSION}\n");
    text.push_str("name,status,kind,margin,tolerance,trials,seed,elapsed_s\n");
    for report in reports {
        let r = sanitized(report, timings);
        let status = serde_json::to_value(r.status).unwrap();
        let kind = serde_json::to_value(r.kind).unwrap();
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.name,
            status.as_str().unwrap(),
            kind.as_str().unwrap(),
            r.margin,
            r.tolerance,
            r.trials,
            r.seed,
            r.elapsed_s
        ));
    }
    text
}

pub fn experiment_csv(table: &ExperimentTable) -> String {
    let mut text = format!("# v={FORMAT_VERSION}\n");
    text.push_str("t,empirical,stderr,bound,pass\n");
    for row in &table.rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            row.t, row.empirical, row.stderr, row.bound, row.pass
        ));
    }
    text
}

pub fn experiment_json(table: &ExperimentTable) -> String {
    let value = serde_json::json!({
        "v": FORMAT_VERSION,
        "statistic": table.statistic,
        "samples": table.samples,
        "seed": table.seed,
        "rows": table.rows,
    });
    let mut text = value.to_string();
    text.push('\n');
    text
}
