//! Aggregated experiment results and their emission formats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub setting: String,
    pub sweep_value: f64,
    pub seed_accuracies: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
}

impl ResultRow {
    pub fn from_accuracies(setting: &str, sweep_value: f64, accs: Vec<f64>) -> ResultRow {
        let n = accs.len() as f64;
        let mean = accs.iter().sum::<f64>() / n;
        let stderr = if accs.len() > 1 {
            let var = accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0);
            var.sqrt() / n.sqrt()
        } else {
            0.0
        };
        ResultRow {
            setting: setting.to_string(),
            sweep_value,
            seed_accuracies: accs,
            mean,
            stderr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub cell: String,
    pub message: String,
}

/// Wall-clock time is kept out of serialization so identical configs
/// produce byte-identical report files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format_version: u32,
    pub fingerprint: String,
    pub use_case: String,
    pub sweep_axis: String,
    pub rows: Vec<ResultRow>,
    pub errors: Vec<CellError>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

impl Report {
    pub fn row(&self, setting: &str, sweep_value: f64) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.setting == setting && r.sweep_value == sweep_value)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("setting,sweep_value,seed_accuracies,mean,stderr\n");
        for row in &self.rows {
            let accs: Vec<String> = row.seed_accuracies.iter().map(|a| a.to_string()).collect();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.setting,
                row.sweep_value,
                accs.join(";"),
                row.mean,
                row.stderr
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Vec<ResultRow>> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 || line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::CorruptEntry(format!("csv line {i}: {line}")));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|e| Error::CorruptEntry(format!("csv line {i}: {e}")))
            };
            rows.push(ResultRow {
                setting: fields[0].to_string(),
                sweep_value: parse(fields[1])?,
                seed_accuracies: fields[2]
                    .split(';')
                    .filter(|s| !s.is_empty())
                    .map(parse)
                    .collect::<Result<Vec<f64>>>()?,
                mean: parse(fields[3])?,
                stderr: parse(fields[4])?,
            });
        }
        Ok(rows)
    }

    /// Pivot table with one row per setting and one column per sweep
    /// value, cells formatted `mean% +- stderr%`.
    pub fn to_table_text(&self) -> String {
        let mut settings: Vec<&str> = self.rows.iter().map(|r| r.setting.as_str()).collect();
        settings.sort_unstable();
        settings.dedup();
        let mut values: Vec<f64> = self.rows.iter().map(|r| r.sweep_value).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();

        let mut out = format!(
            "use case: {} | sweep axis: {} | fingerprint: {}\n",
            self.use_case,
            self.sweep_axis,
            &self.fingerprint[..16.min(self.fingerprint.len())]
        );
        let width = 18usize;
        out.push_str(&format!("{:<16}", "setting"));
        for v in &values {
            out.push_str(&format!("{:>width$}", format_value(*v)));
        }
        out.push('\n');
        for setting in settings {
            out.push_str(&format!("{setting:<16}"));
            for v in &values {
                let cell = match self.row(setting, *v) {
                    Some(r) => format!("{:.1}% ± {:.1}%", r.mean * 100.0, r.stderr * 100.0),
                    None => "-".to_string(),
                };
                out.push_str(&format!("{cell:>width$}"));
            }
            out.push('\n');
        }
        if !self.errors.is_empty() {
            out.push_str("failed cells:\n");
            for e in &self.errors {
                out.push_str(&format!("  {}: {}\n", e.cell, e.message));
            }
        }
        out
    }
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> Report {
        Report {
            format_version: 1,
            fingerprint: "abcd1234deadbeef".into(),
            use_case: "counterfactual".into(),
            sweep_axis: "train_size".into(),
            rows: vec![
                ResultRow::from_accuracies("surrogate", 16.0, vec![0.9, 0.95, 1.0]),
                ResultRow::from_accuracies("baseline", 16.0, vec![0.5, 0.55, 0.6]),
            ],
            errors: vec![],
            notes: vec![],
            wall_clock_secs: 0.0,
        }
    }

    #[test]
    fn stderr_matches_the_formula() {
        let row = ResultRow::from_accuracies("s", 1.0, vec![0.9, 0.95, 1.0]);
        assert!((row.mean - 0.95).abs() < 1e-12);
        // sample std 0.05, stderr 0.05/sqrt(3)
        assert!((row.stderr - 0.05 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let report = demo();
        let csv = report.to_csv();
        let rows = Report::from_csv(&csv).unwrap();
        let again = Report {
            rows,
            ..report.clone()
        };
        assert_eq!(csv, again.to_csv());
    }

    #[test]
    fn table_formats_mean_and_stderr_as_percent() {
        let mut report = demo();
        report.rows = vec![ResultRow {
            setting: "surrogate".into(),
            sweep_value: 16.0,
            seed_accuracies: vec![0.909, 0.942, 0.975],
            mean: 0.942,
            stderr: 0.033,
        }];
        let table = report.to_table_text();
        assert!(table.contains("94.2% ± 3.3%"), "table:\n{table}");
    }

    #[test]
    fn empty_report_errors_on_emit() {
        let mut report = demo();
        report.rows.clear();
        assert!(emit_report_files(&report, std::path::Path::new("/nonexistent-dir-xyz")).is_err());
    }
}

/// Write `report.csv` and `report.txt` next to `report.json` in `dir`.
pub fn emit_report_files(report: &Report, dir: &std::path::Path) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::CorruptEntry("refusing to emit an empty report".into()));
    }
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.csv"), report.to_csv())?;
    std::fs::write(dir.join("report.txt"), report.to_table_text())?;
    std::fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(report)?,
    )?;
    Ok(())
}
