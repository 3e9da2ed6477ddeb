//! Line-delimited evaluation reports: one self-describing JSON record per
//! query followed by a single summary record. Field and record order are
//! fixed, so identical evaluations produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fewshot::EvalReport;

#[derive(Debug, Clone, Serialize)]
struct QueryLine<'a> {
    #[serde(rename = "type")]
    kind: &'a str,
    id: &'a str,
    true_label: usize,
    predicted: usize,
    p_b: &'a [f64],
    p_m: &'a [f64],
    fused: &'a [f64],
}

/// The trailing summary record.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SummaryRecord {
    #[serde(rename = "type")]
    pub kind: String,
    pub overall: f64,
    pub per_class: Vec<f64>,
    pub confusion: Vec<Vec<usize>>,
    pub queries: usize,
}

pub fn write_report(path: impl AsRef<Path>, report: &EvalReport) -> Result<()> {
    let mut out = Vec::new();
    for record in &report.records {
        let line = QueryLine {
            kind: "query",
            id: &record.id,
            true_label: record.true_label,
            predicted: record.predicted,
            p_b: &record.p_b,
            p_m: &record.p_m,
            fused: &record.fused,
        };
        serde_json::to_writer(&mut out, &line)?;
        out.push(b'\n');
    }
    let summary = SummaryRecord {
        kind: "summary".into(),
        overall: report.overall,
        per_class: report.per_class.clone(),
        confusion: report.confusion.clone(),
        queries: report.records.len(),
    };
    serde_json::to_writer(&mut out, &summary)?;
    out.push(b'\n');
    fs::write(path, out)?;
    Ok(())
}

/// Read back just the summary record of a report file.
pub fn read_summary(path: impl AsRef<Path>) -> Result<SummaryRecord> {
    let text = fs::read_to_string(path.as_ref())?;
    for line in text.lines().rev() {
        if line.trim().is_empty() {
            continue;
        }
        let summary: SummaryRecord = serde_json::from_str(line)?;
        if summary.kind == "summary" {
            return Ok(summary);
        }
        break;
    }
    Err(Error::Manifest(format!(
        "{}: no summary record found",
        path.as_ref().display()
    )))
}

/// Write ad-hoc JSON lines (grid tables, ablation rows).
pub fn write_json_lines<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut out = Vec::new();
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        out.push(b'\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fewshot::QueryRecord;
    use tempfile::TempDir;

    #[test]
    fn report_round_trips_summary() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("report.jsonl");
        let report = EvalReport {
            overall: 0.5,
            per_class: vec![1.0, 0.0],
            confusion: vec![vec![1, 0], vec![1, 0]],
            records: vec![
                QueryRecord {
                    id: "a".into(),
                    true_label: 0,
                    predicted: 0,
                    p_b: vec![0.9, 0.1],
                    p_m: vec![0.5, 0.2],
                    fused: vec![1.4, 0.3],
                },
                QueryRecord {
                    id: "b".into(),
                    true_label: 1,
                    predicted: 0,
                    p_b: vec![0.8, 0.2],
                    p_m: vec![0.4, 0.1],
                    fused: vec![1.2, 0.3],
                },
            ],
        };
        write_report(&path, &report).unwrap();
        let summary = read_summary(&path).unwrap();
        assert_eq!(summary.overall, 0.5);
        assert_eq!(summary.queries, 2);
        assert_eq!(summary.confusion[1][0], 1);

        // Two writes of the same report are byte-identical.
        let path2 = dir.path().join("report2.jsonl");
        write_report(&path2, &report).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }
}
