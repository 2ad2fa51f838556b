//! Result serialization: per-run CSV rows, reliability-diagram TSVs, and
//! the aggregated method/dataset summary.
//!
//! Floats are written in Rust's shortest round-trip form, so a parsed-back
//! file reproduces the in-memory values bit for bit. Grid exports are
//! canonical artifacts compared byte-for-byte by the determinism contract:
//! the volatile `wall_time_s` column is zeroed there and the measured times
//! go to a separate `timings.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::GridRunRecord;
use crate::metrics::MetricReport;
use crate::train::RunResult;

pub const RESULTS_HEADER: &str =
    "method,dataset,seed,acc,ece,mce,brier,nll,epochs,wall_time_s";

fn result_row(r: &RunResult) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.config.method.label(),
        r.config.dataset,
        r.config.seed.unwrap_or(0),
        r.test.accuracy,
        r.test.ece,
        r.test.mce,
        r.test.brier,
        r.test.nll,
        r.config.epochs,
        r.wall_time_s
    )
}

/// Writes one CSV row per run (test-set metrics, raw proportions). An empty
/// slice produces a header-only file.
pub fn export_results<'a, I>(results: I, path: impl AsRef<Path>) -> Result<()>
where
    I: IntoIterator<Item = &'a RunResult>,
{
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in results {
        out.push_str(&result_row(r));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes reliability-diagram data: one TSV row per bin, empty bins
/// included with count 0 and empty stat fields.
pub fn export_reliability(report: &MetricReport, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("bin_low\tbin_high\tcount\tmean_confidence\taccuracy\n");
    let m = report.num_bins as f64;
    for (i, b) in report.bins.iter().enumerate() {
        let lo = i as f64 / m;
        let hi = (i + 1) as f64 / m;
        let conf = b.mean_confidence.map(|v| v.to_string()).unwrap_or_default();
        let acc = b.accuracy.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{lo}\t{hi}\t{}\t{conf}\t{acc}", b.count);
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes the three grid artifacts into `dir`:
/// `results.csv` (canonical, byte-reproducible, `wall_time_s` zeroed),
/// `timings.csv` (measured wall times, not covered by the determinism
/// contract), and `failures.csv` when any run failed.
pub fn export_grid(records: &[GridRunRecord], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    let successes: Vec<&RunResult> = records
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .collect();

    let canonical: Vec<RunResult> = successes
        .iter()
        .map(|r| {
            let mut c = (*r).clone();
            c.wall_time_s = 0.0;
            c
        })
        .collect();
    export_results(canonical.iter(), dir.join("results.csv"))?;

    let mut timings = String::from("run_index,method,dataset,seed,wall_time_s\n");
    for record in records {
        if let Ok(r) = &record.outcome {
            let _ = writeln!(
                timings,
                "{},{},{},{},{}",
                record.index,
                r.config.method.label(),
                r.config.dataset,
                r.config.seed.unwrap_or(0),
                r.wall_time_s
            );
        }
    }
    fs::write(dir.join("timings.csv"), timings)?;

    let failures: Vec<&GridRunRecord> = records.iter().filter(|r| r.outcome.is_err()).collect();
    if !failures.is_empty() {
        let mut out = String::from("run_index,method,dataset,error\n");
        for record in failures {
            if let Err(err) = &record.outcome {
                let _ = writeln!(
                    out,
                    "{},{},{},{err}",
                    record.index,
                    record.config.method.label(),
                    record.config.dataset
                );
            }
        }
        fs::write(dir.join("failures.csv"), out)?;
    }
    Ok(())
}

/// One parsed row of a results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: String,
    pub dataset: String,
    pub seed: u64,
    pub acc: f64,
    pub ece: f64,
    pub mce: f64,
    pub brier: f64,
    pub nll: f64,
    pub epochs: usize,
    pub wall_time_s: f64,
}

/// Parses a results CSV written by [`export_results`].
pub fn parse_results_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() || idx == 0 {
            if idx == 0 && line.trim() != RESULTS_HEADER {
                return Err(Error::InputFormat {
                    line: 1,
                    message: format!("unexpected header {line:?}"),
                });
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(Error::InputFormat {
                line: line_no,
                message: format!("expected 10 fields, found {}", fields.len()),
            });
        }
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::InputFormat {
                line: line_no,
                message: format!("cannot parse {s:?} as a number"),
            })
        };
        rows.push(ResultRow {
            method: fields[0].to_string(),
            dataset: fields[1].to_string(),
            seed: fields[2].parse().map_err(|_| Error::InputFormat {
                line: line_no,
                message: format!("cannot parse seed {:?}", fields[2]),
            })?,
            acc: num(fields[3])?,
            ece: num(fields[4])?,
            mce: num(fields[5])?,
            brier: num(fields[6])?,
            nll: num(fields[7])?,
            epochs: fields[8].parse().map_err(|_| Error::InputFormat {
                line: line_no,
                message: format!("cannot parse epochs {:?}", fields[8]),
            })?,
            wall_time_s: num(fields[9])?,
        });
    }
    Ok(rows)
}

/// Median metrics of one (method, dataset) group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub dataset: String,
    pub runs: usize,
    pub acc: f64,
    pub ece: f64,
    pub mce: f64,
    pub brier: f64,
    pub nll: f64,
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite metric values"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Groups rows by (method, dataset) and reports per-group medians, in first
/// appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, String)> = Vec::new();
    for r in rows {
        let key = (r.method.clone(), r.dataset.clone());
        if !order.contains(&key) {
            order.push(key);
        }
    }
    order
        .into_iter()
        .map(|(method, dataset)| {
            let group: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.method == method && r.dataset == dataset)
                .collect();
            let col = |f: fn(&ResultRow) -> f64| {
                let mut v: Vec<f64> = group.iter().map(|r| f(r)).collect();
                median(&mut v)
            };
            SummaryRow {
                runs: group.len(),
                acc: col(|r| r.acc),
                ece: col(|r| r.ece),
                mce: col(|r| r.mce),
                brier: col(|r| r.brier),
                nll: col(|r| r.nll),
                method,
                dataset,
            }
        })
        .collect()
}

/// Renders the summary as an aligned text table (medians across runs).
pub fn format_summary_table(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<18} {:<12} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "method", "dataset", "runs", "acc", "ece", "mce", "brier", "nll"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<18} {:<12} {:>5} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            r.method, r.dataset, r.runs, r.acc, r.ece, r.mce, r.brier, r.nll
        );
    }
    out
}

/// Writes the summary as CSV.
pub fn export_summary(rows: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("method,dataset,runs,acc,ece,mce,brier,nll\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.method, r.dataset, r.runs, r.acc, r.ece, r.mce, r.brier, r.nll
        );
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, Method};
    use crate::train;

    fn sample_result(seed: u64) -> RunResult {
        let mut c = ExperimentConfig::new(Method::Baseline, "overlap2d", vec![2, 8, 2]);
        c.dataset_size = 200;
        c.epochs = 2;
        c.batch_size = 64;
        c.learning_rate.decay_epochs = vec![];
        c.seed = Some(seed);
        train::run(&c).unwrap()
    }

    #[test]
    fn empty_results_give_a_header_only_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        export_results(std::iter::empty(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{RESULTS_HEADER}\n"));
    }

    #[test]
    fn two_runs_make_three_lines_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        let results = [sample_result(1), sample_result(2)];
        export_results(results.iter(), &path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);

        let rows = parse_results_csv(&path).unwrap();
        assert_eq!(rows.len(), 2);
        // bit-exact round trip
        for (row, result) in rows.iter().zip(&results) {
            assert_eq!(row.acc, result.test.accuracy);
            assert_eq!(row.ece, result.test.ece);
            assert_eq!(row.nll, result.test.nll);
            assert_eq!(row.seed, result.config.seed.unwrap());
        }
        // column means recomputed from the file match in-memory aggregation
        let mean_file: f64 = rows.iter().map(|r| r.ece).sum::<f64>() / 2.0;
        let mean_mem: f64 = results.iter().map(|r| r.test.ece).sum::<f64>() / 2.0;
        assert!((mean_file - mean_mem).abs() < 1e-9);
    }

    #[test]
    fn reliability_export_has_all_bins_and_recomposes_ece() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("reliability.tsv");
        let result = sample_result(3);
        export_reliability(&result.test, &path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + result.test.num_bins);

        let mut total = 0usize;
        let mut ece = 0.0;
        let mut weighted: Vec<(usize, f64)> = Vec::new();
        for line in &lines[1..] {
            let f: Vec<&str> = line.split('\t').collect();
            assert_eq!(f.len(), 5);
            let count: usize = f[2].parse().unwrap();
            if count == 0 {
                assert!(f[3].is_empty() && f[4].is_empty());
            } else {
                let conf: f64 = f[3].parse().unwrap();
                let acc: f64 = f[4].parse().unwrap();
                weighted.push((count, (acc - conf).abs()));
            }
            total += count;
        }
        for (count, gap) in weighted {
            ece += count as f64 / total as f64 * gap;
        }
        assert!((ece - result.test.ece).abs() < 1e-12);
    }

    #[test]
    fn summary_groups_and_takes_medians() {
        let rows = vec![
            ResultRow {
                method: "baseline".into(),
                dataset: "ring8".into(),
                seed: 1,
                acc: 0.7,
                ece: 0.10,
                mce: 0.2,
                brier: 0.4,
                nll: 0.9,
                epochs: 10,
                wall_time_s: 0.0,
            },
            ResultRow {
                method: "baseline".into(),
                dataset: "ring8".into(),
                seed: 2,
                acc: 0.8,
                ece: 0.30,
                mce: 0.4,
                brier: 0.5,
                nll: 1.1,
                epochs: 10,
                wall_time_s: 0.0,
            },
            ResultRow {
                method: "baseline".into(),
                dataset: "ring8".into(),
                seed: 3,
                acc: 0.9,
                ece: 0.20,
                mce: 0.3,
                brier: 0.6,
                nll: 1.0,
                epochs: 10,
                wall_time_s: 0.0,
            },
        ];
        let summary = summarize(&rows);
        assert_eq!(summary.len(), 1);
        assert_eq!(summary[0].runs, 3);
        assert_eq!(summary[0].acc, 0.8);
        assert_eq!(summary[0].ece, 0.2);
        let table = format_summary_table(&summary);
        assert!(table.contains("baseline"));
        assert!(table.contains("ring8"));
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let err = export_results(std::iter::empty(), "/nonexistent-dir/results.csv").unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
