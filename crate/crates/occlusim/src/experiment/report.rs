//! Experiment reports: raw per-replication records, per-sweep-point
//! aggregates, provenance, and deterministic CSV serialization.
//!
//! Wall-clock timings are deliberately kept out of the report: a
//! `(config, master seed)` pair must reproduce the report byte for byte,
//! so timings go to a separate, explicitly non-deterministic file.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Identification block sufficient to re-run the experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub name: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub code_version: String,
}

impl Provenance {
    fn header_lines(&self) -> String {
        format!(
            "# name={}\n# config_hash={}\n# master_seed={}\n# code_version={}\n",
            self.name, self.config_hash, self.master_seed, self.code_version
        )
    }
}

/// One raw record: replication bookkeeping plus named value columns.
#[derive(Debug, Clone)]
pub struct ReportRow {
    /// Active sweep-axis values, aligned with `sweep_columns`.
    pub sweep: Vec<f64>,
    pub replication: usize,
    pub seed: u64,
    /// Values aligned with `value_columns`.
    pub values: Vec<f64>,
}

/// Per-sweep-point mean and standard deviation of every value column.
#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub sweep: Vec<f64>,
    pub count: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Extra deterministic artifact emitted by a run (CSV or SVG).
#[derive(Debug, Clone)]
pub struct Artifact {
    pub filename: String,
    pub content: String,
}

/// Full outcome of one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub provenance: Provenance,
    pub sweep_columns: Vec<String>,
    pub value_columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<AggregateRow>,
    pub artifacts: Vec<Artifact>,
}

fn fmt_cell(v: f64) -> String {
    if v.is_finite() {
        // Shortest round-trip representation keeps files readable and
        // exactly re-parseable.
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl ExperimentReport {
    /// Group rows by sweep point (input order preserved) and compute the
    /// per-column mean and standard deviation.
    pub fn aggregate(
        sweep_columns: &[String],
        value_columns: &[String],
        rows: &[ReportRow],
    ) -> Vec<AggregateRow> {
        let mut order: Vec<Vec<u64>> = Vec::new();
        let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
        for (i, row) in rows.iter().enumerate() {
            let key: Vec<u64> = row.sweep.iter().map(|v| v.to_bits()).collect();
            if !groups.contains_key(&key) {
                order.push(key.clone());
            }
            groups.entry(key).or_default().push(i);
        }
        let _ = sweep_columns;
        order
            .into_iter()
            .map(|key| {
                let members = &groups[&key];
                let count = members.len();
                let sweep = rows[members[0]].sweep.clone();
                let mut mean = vec![0.0; value_columns.len()];
                for &i in members {
                    for (j, v) in rows[i].values.iter().enumerate() {
                        mean[j] += v;
                    }
                }
                for m in &mut mean {
                    *m /= count as f64;
                }
                let mut std = vec![0.0; value_columns.len()];
                if count > 1 {
                    for &i in members {
                        for (j, v) in rows[i].values.iter().enumerate() {
                            std[j] += (v - mean[j]) * (v - mean[j]);
                        }
                    }
                    for s in &mut std {
                        *s = (*s / (count as f64 - 1.0)).sqrt();
                    }
                }
                AggregateRow { sweep, count, mean, std }
            })
            .collect()
    }

    /// Raw records as CSV with the provenance header.
    pub fn results_csv(&self) -> String {
        let mut out = self.provenance.header_lines();
        let mut cols: Vec<&str> = self.sweep_columns.iter().map(|s| s.as_str()).collect();
        cols.push("replication");
        cols.push("seed");
        cols.extend(self.value_columns.iter().map(|s| s.as_str()));
        out.push_str(&cols.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut cells: Vec<String> = row.sweep.iter().map(|v| fmt_cell(*v)).collect();
            cells.push(row.replication.to_string());
            cells.push(row.seed.to_string());
            cells.extend(row.values.iter().map(|v| fmt_cell(*v)));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Aggregates as CSV with the provenance header.
    pub fn aggregates_csv(&self) -> String {
        let mut out = self.provenance.header_lines();
        let mut cols: Vec<String> = self.sweep_columns.clone();
        cols.push("count".into());
        for c in &self.value_columns {
            cols.push(format!("mean_{c}"));
        }
        for c in &self.value_columns {
            cols.push(format!("std_{c}"));
        }
        out.push_str(&cols.join(","));
        out.push('\n');
        for agg in &self.aggregates {
            let mut cells: Vec<String> = agg.sweep.iter().map(|v| fmt_cell(*v)).collect();
            cells.push(agg.count.to_string());
            cells.extend(agg.mean.iter().map(|v| fmt_cell(*v)));
            cells.extend(agg.std.iter().map(|v| fmt_cell(*v)));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Write `results.csv`, `aggregates.csv` and all artifacts into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("results.csv"), self.results_csv())?;
        std::fs::write(dir.join("aggregates.csv"), self.aggregates_csv())?;
        for artifact in &self.artifacts {
            std::fs::write(dir.join(&artifact.filename), &artifact.content)?;
        }
        Ok(())
    }
}

/// Parsed CSV table (provenance comments skipped), as written by
/// [`ExperimentReport::results_csv`] or any plain numeric CSV with a
/// header line.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<CsvTable> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("CSV has no header line".into()))?;
        let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for line in lines {
            let cells: Result<Vec<f64>> = line
                .split(',')
                .map(|c| {
                    let c = c.trim();
                    match c {
                        "nan" => Ok(f64::NAN),
                        "inf" => Ok(f64::INFINITY),
                        "-inf" => Ok(f64::NEG_INFINITY),
                        _ => c
                            .parse::<f64>()
                            .map_err(|e| Error::Config(format!("bad CSV cell {c:?}: {e}"))),
                    }
                })
                .collect();
            let cells = cells?;
            if cells.len() != columns.len() {
                return Err(Error::Config(format!(
                    "CSV row has {} cells, header has {}",
                    cells.len(),
                    columns.len()
                )));
            }
            rows.push(cells);
        }
        Ok(CsvTable { columns, rows })
    }

    pub fn load(path: &Path) -> Result<CsvTable> {
        CsvTable::parse(&std::fs::read_to_string(path)?)
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> ExperimentReport {
        let rows = vec![
            ReportRow { sweep: vec![1.0], replication: 0, seed: 7, values: vec![0.5, 2.0] },
            ReportRow { sweep: vec![1.0], replication: 1, seed: 6, values: vec![0.7, 4.0] },
            ReportRow { sweep: vec![2.0], replication: 0, seed: 7, values: vec![0.1, 1.0] },
        ];
        let sweep_columns = vec!["dt_ps".to_string()];
        let value_columns = vec!["nmse".to_string(), "snr_db".to_string()];
        let aggregates = ExperimentReport::aggregate(&sweep_columns, &value_columns, &rows);
        ExperimentReport {
            provenance: Provenance {
                name: "sample".into(),
                config_hash: "abc".into(),
                master_seed: 7,
                code_version: "0.0.0".into(),
            },
            sweep_columns,
            value_columns,
            rows,
            aggregates,
            artifacts: vec![],
        }
    }

    #[test]
    fn aggregates_are_exact_means() {
        let report = sample_report();
        assert_eq!(report.aggregates.len(), 2);
        let a = &report.aggregates[0];
        assert_eq!(a.count, 2);
        assert!((a.mean[0] - 0.6).abs() < 1e-12);
        assert!((a.mean[1] - 3.0).abs() < 1e-12);
        let b = &report.aggregates[1];
        assert_eq!(b.count, 1);
        assert_eq!(b.std[0], 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let report = sample_report();
        let csv = report.results_csv();
        assert!(csv.starts_with("# name=sample"));
        let table = CsvTable::parse(&csv).unwrap();
        assert_eq!(table.columns, vec!["dt_ps", "replication", "seed", "nmse", "snr_db"]);
        assert_eq!(table.rows.len(), 3);
        assert_eq!(table.column("nmse").unwrap(), vec![0.5, 0.7, 0.1]);
        assert!(matches!(table.column("missing"), Err(Error::MissingColumn(_))));
    }

    #[test]
    fn csv_bytes_are_stable() {
        let a = sample_report().results_csv();
        let b = sample_report().results_csv();
        assert_eq!(a, b);
        let agg_a = sample_report().aggregates_csv();
        let agg_b = sample_report().aggregates_csv();
        assert_eq!(agg_a, agg_b);
    }
}
