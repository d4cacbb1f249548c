use std::cmp::Ordering;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipelines::Method;

use super::config::{OutputFormat, Task};

pub const SCHEMA_VERSION: u32 = 1;

/// Column names of the results CSV. The first column carries the schema
/// version on every line.
pub const CSV_HEADER: [&str; 16] = [
    "schema_version",
    "kind",
    "dataset",
    "task",
    "method",
    "ratio",
    "r",
    "trial",
    "seed",
    "metric",
    "stderr",
    "count",
    "epochs",
    "wall_time",
    "status",
    "error",
];

/// One (method, ratio, r, trial) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub dataset: String,
    pub task: Task,
    pub method: Method,
    pub ratio: Option<f64>,
    pub r: Option<f64>,
    pub trial: usize,
    pub seed: u64,
    pub metric: Option<f64>,
    pub epochs: Option<usize>,
    pub wall_time: f64,
    /// Failure reason; `None` for a successful cell.
    pub error: Option<String>,
}

impl Row {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    fn group_key(&self) -> (&str, Method, Option<f64>, Option<f64>) {
        (&self.dataset, self.method, self.ratio, self.r)
    }
}

fn cmp_opt(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (a, b) => a.is_some().cmp(&b.is_some()),
    }
}

/// Canonical row order: dataset, method, ratio, r, trial.
pub fn canonical_cmp(a: &Row, b: &Row) -> Ordering {
    a.dataset
        .cmp(&b.dataset)
        .then(a.method.cmp(&b.method))
        .then(cmp_opt(a.ratio, b.ratio))
        .then(cmp_opt(a.r, b.r))
        .then(a.trial.cmp(&b.trial))
}

/// Mean and standard error of the successful trials of one (method, ratio, r) group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub dataset: String,
    pub task: Task,
    pub method: Method,
    pub ratio: Option<f64>,
    pub r: Option<f64>,
    /// Successful trials with a metric.
    pub count: usize,
    pub failed: usize,
    pub mean: Option<f64>,
    /// Sample standard deviation over `sqrt(count)`; needs two trials.
    pub stderr: Option<f64>,
    pub mean_epochs: Option<f64>,
    pub mean_wall_time: f64,
}

pub fn mean_stderr(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (Some(mean), Some((var / n as f64).sqrt()))
}

/// Groups canonically sorted rows.
pub fn aggregate(rows: &[Row]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let key = rows[start].group_key();
        let end = start + rows[start..].iter().take_while(|r| r.group_key() == key).count();
        let group = &rows[start..end];
        let metrics: Vec<f64> = group.iter().filter(|r| r.ok()).filter_map(|r| r.metric).collect();
        let epochs: Vec<f64> = group
            .iter()
            .filter(|r| r.ok())
            .filter_map(|r| r.epochs.map(|e| e as f64))
            .collect();
        let (mean, stderr) = mean_stderr(&metrics);
        let head = &group[0];
        out.push(Aggregate {
            dataset: head.dataset.clone(),
            task: head.task,
            method: head.method,
            ratio: head.ratio,
            r: head.r,
            count: metrics.len(),
            failed: group.iter().filter(|r| !r.ok()).count(),
            mean,
            stderr,
            mean_epochs: mean_stderr(&epochs).0,
            mean_wall_time: group.iter().map(|r| r.wall_time).sum::<f64>() / group.len() as f64,
        });
        start = end;
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub rows: Vec<Row>,
    pub aggregates: Vec<Aggregate>,
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl RunReport {
    /// Sorts the rows canonically and recomputes the aggregates.
    pub fn from_rows(mut rows: Vec<Row>) -> Self {
        rows.sort_by(canonical_cmp);
        let aggregates = aggregate(&rows);
        Self { rows, aggregates }
    }

    pub fn failed_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.ok())
    }

    pub fn has_failures(&self) -> bool {
        self.failed_rows().next().is_some()
    }

    pub fn find(&self, method: Method, ratio: Option<f64>, r: Option<f64>) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.method == method && a.ratio == ratio && a.r == r)
    }

    /// Row cells in [`CSV_HEADER`] order.
    pub fn row_record(row: &Row) -> Vec<String> {
        vec![
            SCHEMA_VERSION.to_string(),
            "trial".into(),
            row.dataset.clone(),
            row.task.to_string(),
            row.method.to_string(),
            fmt_opt(row.ratio),
            fmt_opt(row.r),
            row.trial.to_string(),
            row.seed.to_string(),
            fmt_opt(row.metric),
            String::new(),
            String::new(),
            fmt_opt(row.epochs),
            row.wall_time.to_string(),
            if row.ok() { "ok" } else { "failed" }.into(),
            row.error.clone().unwrap_or_default(),
        ]
    }

    fn aggregate_record(a: &Aggregate) -> Vec<String> {
        vec![
            SCHEMA_VERSION.to_string(),
            "aggregate".into(),
            a.dataset.clone(),
            a.task.to_string(),
            a.method.to_string(),
            fmt_opt(a.ratio),
            fmt_opt(a.r),
            String::new(),
            String::new(),
            fmt_opt(a.mean),
            fmt_opt(a.stderr),
            a.count.to_string(),
            fmt_opt(a.mean_epochs),
            a.mean_wall_time.to_string(),
            if a.failed == 0 { "ok".into() } else { format!("{} failed", a.failed) },
            String::new(),
        ]
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::Config(format!("csv output: {e}"));
        out.write_record(CSV_HEADER).map_err(csv_err)?;
        for row in &self.rows {
            out.write_record(Self::row_record(row)).map_err(csv_err)?;
        }
        for a in &self.aggregates {
            out.write_record(Self::aggregate_record(a)).map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::Config(format!("csv output: {e}")))?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema_version: u32,
            #[serde(flatten)]
            report: &'a RunReport,
        }
        serde_json::to_writer_pretty(w, &Doc { schema_version: SCHEMA_VERSION, report: self })
            .map_err(|e| Error::Config(format!("json output: {e}")))
    }

    pub fn write_to(&self, path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut buf = std::io::BufWriter::new(file);
        match format {
            OutputFormat::Csv => self.write_csv(&mut buf)?,
            OutputFormat::Json => self.write_json(&mut buf)?,
        }
        buf.flush().map_err(|e| Error::io(path, e))
    }

    /// The CSV with the wall-time column blanked, for reproducibility checks.
    pub fn metric_rows_csv(&self) -> String {
        let wall = CSV_HEADER.iter().position(|&h| h == "wall_time").expect("column exists");
        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record(CSV_HEADER).expect("in-memory write");
        for row in &self.rows {
            let mut rec = Self::row_record(row);
            rec[wall].clear();
            out.write_record(rec).expect("in-memory write");
        }
        String::from_utf8(out.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}
