use std::borrow::Cow;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, LabelVector};
use crate::pipelines::{classify, cluster, split_nodes, Method, MethodConfig, SplitRatio};
use crate::rng::{derive_seed, hash_str, stage_rng, Stage};
use crate::synth::{sample_dcsbm, sample_sbm};

use super::config::{ExperimentConfig, Source, Task};
use super::dataset::{load_dataset, load_fixture};
use super::report::{RunReport, Row, CSV_HEADER};

pub const THREADS_ENV: &str = "GNNSEED_THREADS";

/// Seed of the graph drawn for trial `trial` at grid point `r`. Shared by
/// every method and split ratio, so they are compared on the same graphs.
pub fn graph_seed(base_seed: u64, dataset: &str, r: Option<f64>, trial: usize) -> u64 {
    let r_word = r.map_or(u64::MAX, f64::to_bits);
    derive_seed(base_seed, &[hash_str(dataset), r_word, trial as u64])
}

/// Seed of one cell. Methods share it, which pairs GG with the GEE run it
/// warm-starts from and GNN with GG's weight initialisation.
pub fn cell_seed(base_seed: u64, dataset: &str, ratio: Option<SplitRatio>, r: Option<f64>, trial: usize) -> u64 {
    let g = graph_seed(base_seed, dataset, r, trial);
    match ratio {
        Some(ratio) => derive_seed(g, &[ratio.0.to_bits()]),
        None => g,
    }
}

/// Pool size: the explicit value, else `GNNSEED_THREADS`, else the CPU count.
pub fn resolve_threads(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(THREADS_ENV).ok()?.trim().parse().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

enum Data {
    Fixed { graph: Graph, labels: LabelVector },
    Generated,
}

struct Job {
    point: Option<f64>,
    trial: usize,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    dataset: String,
    methods: Vec<Method>,
    ratios: Vec<Option<SplitRatio>>,
    data: Data,
}

impl Ctx<'_> {
    fn graph_for(&self, job: &Job) -> Result<(Cow<'_, Graph>, Cow<'_, LabelVector>)> {
        match &self.data {
            Data::Fixed { graph, labels } => Ok((Cow::Borrowed(graph), Cow::Borrowed(labels))),
            Data::Generated => {
                let (spec, dc) = self.cfg.source.generator().expect("generated source");
                let r = job.point.expect("generated sources sweep r");
                let bm = spec.block_model(r, dc);
                let mut rng = stage_rng(graph_seed(self.cfg.base_seed, &self.dataset, job.point, job.trial), Stage::Graph);
                if dc {
                    let s = sample_dcsbm(&bm, &mut rng)?;
                    Ok((Cow::Owned(s.graph), Cow::Owned(s.labels)))
                } else {
                    let (g, y) = sample_sbm(&bm, &mut rng)?;
                    Ok((Cow::Owned(g), Cow::Owned(y)))
                }
            }
        }
    }

    fn run_job(&self, job: &Job, emit: &mut dyn FnMut(Row)) {
        let graph = self.graph_for(job);
        for &ratio in &self.ratios {
            let seed = cell_seed(self.cfg.base_seed, &self.dataset, ratio, job.point, job.trial);
            let masks = match (&graph, ratio) {
                (Ok((_, y)), Some(ratio)) => Some(split_nodes(y, ratio, &mut stage_rng(seed, Stage::Split))),
                _ => None,
            };
            for &method in &self.methods {
                let mut row = Row {
                    dataset: self.dataset.clone(),
                    task: self.cfg.task,
                    method,
                    ratio: ratio.map(|r| r.0),
                    r: job.point,
                    trial: job.trial,
                    seed,
                    metric: None,
                    epochs: None,
                    wall_time: 0.0,
                    error: None,
                };
                let outcome = match (&graph, &masks) {
                    (Err(e), _) | (Ok(_), Some(Err(e))) => Err(e.to_string()),
                    (Ok((g, y)), Some(Ok(m))) => {
                        classify(method, g, y, m, &self.cfg.train, seed).map_err(|e| e.to_string())
                    }
                    (Ok((g, y)), None) => {
                        cluster(method, g, y.k(), Some(y), &self.cfg.train, seed).map_err(|e| e.to_string())
                    }
                };
                match outcome {
                    Ok(res) => {
                        row.metric = res.metric;
                        row.epochs = res.epochs_run;
                        row.wall_time = res.wall_time;
                    }
                    Err(e) => row.error = Some(e),
                }
                emit(row);
            }
        }
    }
}

fn partial_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".partial");
    PathBuf::from(name)
}

/// Appends rows as they arrive, one flushed CSV record each.
type PartialWriter = (mpsc::Sender<Row>, thread::JoinHandle<Result<Vec<Row>>>);

fn spawn_partial_writer(path: PathBuf) -> Result<PartialWriter> {
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let (tx, rx) = mpsc::channel::<Row>();
    let handle = thread::spawn(move || {
        let mut w = csv::Writer::from_writer(file);
        let io = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
        w.write_record(CSV_HEADER).map_err(io)?;
        let mut rows = Vec::new();
        for row in rx {
            w.write_record(RunReport::row_record(&row)).map_err(io)?;
            w.flush().map_err(|e| Error::io(&path, e))?;
            rows.push(row);
        }
        Ok(rows)
    });
    Ok((tx, handle))
}

/// Runs every (grid point, trial, ratio, method) cell of `cfg`.
///
/// Failed cells become rows carrying the error message and do not stop the
/// sweep. With an output path, rows are appended to `<path>.partial` while the
/// sweep runs and the canonically ordered report replaces it at the end.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let dataset = cfg.source.dataset_name();
    let data = match &cfg.source {
        Source::Files { edges, labels, .. } => {
            let d = load_dataset(edges, labels)?;
            Data::Fixed { graph: d.graph, labels: d.labels }
        }
        Source::Fixture { name } => {
            let d = load_fixture(name)?;
            Data::Fixed { graph: d.graph, labels: d.labels }
        }
        Source::Sbm(_) | Source::Dcsbm(_) => Data::Generated,
    };
    let ctx = Ctx {
        cfg,
        dataset,
        methods: cfg.resolved_methods(),
        ratios: cfg.resolved_ratios(),
        data,
    };
    let jobs: Vec<Job> = cfg
        .r_values()
        .into_iter()
        .flat_map(|point| (0..cfg.trials).map(move |trial| Job { point, trial }))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_threads(cfg.threads))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let rows = match &cfg.output {
        Some(out) => {
            let partial = partial_path(&out.path);
            if let Some(dir) = partial.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            let (tx, handle) = spawn_partial_writer(partial.clone())?;
            pool.install(|| {
                jobs.par_iter().for_each_with(tx, |tx, job| {
                    ctx.run_job(job, &mut |row| {
                        let _ = tx.send(row);
                    })
                })
            });
            let rows = handle
                .join()
                .map_err(|_| Error::Config("result writer panicked".into()))??;
            let report = RunReport::from_rows(rows);
            report.write_to(&out.path, out.format)?;
            std::fs::remove_file(&partial).map_err(|e| Error::io(&partial, e))?;
            return Ok(report);
        }
        None => pool.install(|| {
            jobs.par_iter()
                .flat_map_iter(|job| {
                    let mut rows = Vec::new();
                    ctx.run_job(job, &mut |row| rows.push(row));
                    rows
                })
                .collect::<Vec<Row>>()
        }),
    };
    Ok(RunReport::from_rows(rows))
}

/// Shorthand used by tests and the CLI: default settings for `task` on `source`.
pub fn quick_config(task: Task, source: Source, methods: Vec<Method>, trials: usize, base_seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        methods,
        trials,
        base_seed,
        train: MethodConfig::default(),
        ..ExperimentConfig::new(task, source)
    }
}
