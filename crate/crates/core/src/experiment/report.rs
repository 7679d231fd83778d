use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ExperimentRecord;
use crate::error::{Error, Result};
use crate::optimize::Method;

/// One (n, optimizer, p) cell. Column order is the CSV header order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub n: usize,
    pub optimizer: Method,
    pub p: usize,
    pub mean_qaoa_cut: f64,
    pub std_qaoa_cut: f64,
    pub mean_classical_cut: f64,
    /// mean(QAOA) / mean(classical).
    pub ratio_of_means: f64,
    /// mean over records of QAOA / classical.
    pub mean_ratio: f64,
    pub mean_runtime_s: f64,
    pub std_runtime_s: f64,
    #[serde(skip)]
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub rows: Vec<AggregateRow>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation; 0 for a single value.
fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// `0 / 0` is taken as 1: both methods found the only possible cut.
fn ratio(qaoa: f64, classical: f64) -> f64 {
    if classical == 0.0 {
        if qaoa == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        qaoa / classical
    }
}

/// Groups records by (n, optimizer, p). Records carrying an error are left
/// out; a cell left without records is dropped with a warning.
pub fn aggregate(records: &[ExperimentRecord]) -> Result<AggregateReport> {
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    let mut cells: BTreeMap<(usize, Method, usize), Vec<&ExperimentRecord>> = BTreeMap::new();
    for record in records {
        let cell = cells.entry((record.n, record.optimizer, record.p)).or_default();
        if let Some(err) = &record.error {
            log::warn!(
                "{} {} p={}: skipping failed record: {err}",
                record.graph_id,
                record.optimizer,
                record.p
            );
        } else {
            cell.push(record);
        }
    }

    let mut rows = Vec::new();
    for ((n, optimizer, p), cell) in cells {
        if cell.is_empty() {
            log::warn!("n={n} {optimizer} p={p}: no usable records, cell omitted");
            continue;
        }
        let qaoa: Vec<f64> = cell.iter().map(|r| r.qaoa_best_sampled as f64).collect();
        let classical: Vec<f64> = cell.iter().map(|r| r.classical_cut as f64).collect();
        let runtime: Vec<f64> = cell.iter().map(|r| r.optimize_wall_seconds).collect();
        let ratios: Vec<f64> = qaoa.iter().zip(&classical).map(|(&q, &c)| ratio(q, c)).collect();
        rows.push(AggregateRow {
            n,
            optimizer,
            p,
            mean_qaoa_cut: mean(&qaoa),
            std_qaoa_cut: std_dev(&qaoa),
            mean_classical_cut: mean(&classical),
            ratio_of_means: ratio(mean(&qaoa), mean(&classical)),
            mean_ratio: mean(&ratios),
            mean_runtime_s: mean(&runtime),
            std_runtime_s: std_dev(&runtime),
            count: cell.len(),
        });
    }
    Ok(AggregateReport { rows })
}

impl AggregateReport {
    pub fn row(&self, n: usize, optimizer: Method, p: usize) -> Option<&AggregateRow> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.optimizer == optimizer && r.p == p)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer.serialize(row).map_err(|e| Error::Csv {
                path: "<memory>".into(),
                source: e,
            })?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::io("<memory>", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    /// Fixed-width console table.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:>4} {:<12} {:>2} {:>9} {:>8} {:>9} {:>7} {:>7} {:>10} {:>9}\n",
            "n", "optimizer", "p", "qaoa", "std", "classical", "ratio", "mratio", "runtime_s", "std_s"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>4} {:<12} {:>2} {:>9.3} {:>8.3} {:>9.3} {:>7.3} {:>7.3} {:>10.4} {:>9.4}",
                r.n,
                r.optimizer.as_str(),
                r.p,
                r.mean_qaoa_cut,
                r.std_qaoa_cut,
                r.mean_classical_cut,
                r.ratio_of_means,
                r.mean_ratio,
                r.mean_runtime_s,
                r.std_runtime_s
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qaoa::QaoaParams;

    fn record(qaoa: usize, classical: usize, seconds: f64) -> ExperimentRecord {
        ExperimentRecord {
            graph_id: "g".into(),
            n: 4,
            optimizer: Method::Bfgs,
            p: 1,
            qaoa_best_sampled: qaoa,
            qaoa_expected_cut: qaoa as f64,
            classical_cut: classical,
            optimize_wall_seconds: seconds,
            n_evals: 1,
            n_grad_evals: 1,
            final_params: QaoaParams::zeros(1).unwrap(),
            setup_wall_seconds: 0.0,
            termination: None,
            error: None,
        }
    }

    #[test]
    fn single_record() {
        let report = aggregate(&[record(2, 2, 0.5)]).unwrap();
        let row = &report.rows[0];
        assert_eq!(row.ratio_of_means, 1.0);
        assert_eq!(row.std_qaoa_cut, 0.0);
        assert_eq!(row.std_runtime_s, 0.0);
    }

    #[test]
    fn ratio_of_means_not_mean_of_ratios() {
        let report = aggregate(&[record(1, 2, 1.0), record(3, 2, 3.0)]).unwrap();
        let row = &report.rows[0];
        assert_eq!(row.ratio_of_means, 1.0);
        assert_eq!(row.mean_qaoa_cut, 2.0);
        assert!((row.std_qaoa_cut - 2f64.sqrt()).abs() < 1e-12);
        assert!((row.std_runtime_s - 2f64.sqrt()).abs() < 1e-12);

        let skewed = aggregate(&[record(1, 1, 1.0), record(2, 4, 1.0)]).unwrap();
        assert!((skewed.rows[0].ratio_of_means - 0.6).abs() < 1e-12);
        assert!((skewed.rows[0].mean_ratio - 0.75).abs() < 1e-12);
    }

    #[test]
    fn failed_records_dropped() {
        let mut bad = record(0, 2, 0.0);
        bad.error = Some("boom".into());
        let mut other_cell = bad.clone();
        other_cell.p = 2;
        let report = aggregate(&[record(2, 2, 0.1), bad, other_cell]).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].count, 1);
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn csv_header() {
        let csv = aggregate(&[record(2, 2, 0.5)]).unwrap().to_csv().unwrap();
        let header = csv.lines().next().unwrap();
        assert_eq!(
            header,
            "n,optimizer,p,mean_qaoa_cut,std_qaoa_cut,mean_classical_cut,ratio_of_means,mean_ratio,mean_runtime_s,std_runtime_s"
        );
        assert!(csv.lines().nth(1).unwrap().starts_with("4,bfgs,1,2.0,"));
    }
}
