use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gnnseed::experiment::{
    load_dataset, load_fixture, run_experiment, Dataset, ExperimentConfig, GeneratorSpec, OutputFormat, OutputSpec,
    RGrid, RunReport, Source, Task,
};
use gnnseed::graph::{write_edge_list, write_labels};
use gnnseed::rng::{stage_rng, Stage};
use gnnseed::synth::{sample_dcsbm, sample_sbm};
use gnnseed::{classify, cluster, split_nodes, Embedding, Method, MethodConfig, SplitRatio};

#[derive(Parser)]
#[command(name = "gnnseed", version, about = "GEE, GCN and GEE-warm-started GCN experiments on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a labelled graph and score against its labels (ARI).
    Cluster(DataSweep),
    /// Node classification over train/val/test splits (test accuracy).
    Classify(ClassifySweep),
    /// Sweep an SBM or DC-SBM generator over a grid of inter-community probabilities.
    Synth(SynthSweep),
    /// Draw one SBM / DC-SBM graph and write it as an edge list plus labels.
    Generate(GenerateArgs),
    /// Write the embedding a method produces, one row per node.
    Embed(EmbedArgs),
    /// Run an experiment described by a TOML or JSON config file.
    Run(RunArgs),
}

#[derive(Args)]
struct DataSource {
    /// Edge list, two node ids per line.
    #[arg(long, requires = "labels", conflicts_with = "fixture")]
    edges: Option<PathBuf>,
    /// One integer label per node.
    #[arg(long, requires = "edges")]
    labels: Option<PathBuf>,
    /// Bundled dataset name, e.g. `karate`.
    #[arg(long)]
    fixture: Option<String>,
    /// Dataset name used in the output.
    #[arg(long)]
    name: Option<String>,
}

impl DataSource {
    fn source(&self) -> Result<Source> {
        match (&self.edges, &self.labels, &self.fixture) {
            (Some(edges), Some(labels), None) => Ok(Source::Files {
                edges: edges.clone(),
                labels: labels.clone(),
                name: self.name.clone(),
            }),
            (None, None, Some(name)) => Ok(Source::Fixture { name: name.clone() }),
            _ => bail!("give either --edges and --labels, or --fixture"),
        }
    }

    fn load(&self) -> Result<Dataset> {
        let d = match self.source()? {
            Source::Files { edges, labels, .. } => load_dataset(&edges, &labels)?,
            Source::Fixture { name } => load_fixture(&name)?,
            _ => unreachable!("data sources only"),
        };
        Ok(d)
    }
}

#[derive(Args)]
struct SweepFlags {
    /// Comma-separated subset of gee, gnn, gg, gg-c.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Base seed every cell seed is derived from.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: GNNSEED_THREADS, then the CPU count).
    #[arg(long, env = "GNNSEED_THREADS")]
    threads: Option<usize>,
    /// Results file; CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Print the equivalent config file and exit.
    #[arg(long)]
    print_config: bool,
    #[command(flatten)]
    train: TrainFlags,
}

#[derive(Args)]
struct TrainFlags {
    /// Epoch cap for every network run.
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    weight_decay: Option<f64>,
    /// Iteration cap of unsupervised GEE.
    #[arg(long)]
    gee_max_iter: Option<usize>,
}

impl TrainFlags {
    fn apply(&self, cfg: &mut MethodConfig) {
        for t in [&mut cfg.clustering, &mut cfg.classification] {
            if let Some(v) = self.max_epochs {
                t.max_epochs = v;
            }
            if let Some(v) = self.patience {
                t.patience = v;
            }
            if let Some(v) = self.lr {
                t.learning_rate = v;
            }
            if let Some(v) = self.dropout {
                t.dropout = v;
            }
            if let Some(v) = self.weight_decay {
                t.weight_decay = v;
            }
        }
        if let Some(v) = self.gee_max_iter {
            cfg.gee_max_iter = v;
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Cluster,
    Classify,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Cluster => Task::Cluster,
            TaskArg::Classify => Task::Classify,
        }
    }
}

#[derive(Args)]
struct DataSweep {
    #[command(flatten)]
    data: DataSource,
    #[command(flatten)]
    sweep: SweepFlags,
}

#[derive(Args)]
struct ClassifySweep {
    #[command(flatten)]
    data: DataSource,
    /// Train+val pool sizes in percent.
    #[arg(long, value_delimiter = ',', default_values_t = [5.0, 10.0, 20.0, 50.0])]
    ratios: Vec<f64>,
    #[command(flatten)]
    sweep: SweepFlags,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Sbm,
    Dcsbm,
}

#[derive(Args)]
struct ModelFlags {
    #[arg(long, value_enum, default_value_t = Model::Dcsbm)]
    model: Model,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Number of communities; must match --sizes when both are given.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.3)]
    intra: f64,
    /// Relative community sizes, e.g. 1:2:3:4 (default: equal).
    #[arg(long)]
    sizes: Option<String>,
    /// Degree parameter law for the DC-SBM, `beta:a,b`.
    #[arg(long, default_value = "beta:1,4")]
    theta: String,
}

impl ModelFlags {
    fn spec(&self, r_grid: RGrid) -> Result<Source> {
        let sizes: Vec<f64> = match &self.sizes {
            Some(s) => s
                .split(':')
                .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad size {p:?} in --sizes")))
                .collect::<Result<_>>()?,
            None => vec![1.0; self.k.unwrap_or(2)],
        };
        if let Some(k) = self.k.filter(|&k| k != sizes.len()) {
            bail!("--k {k} disagrees with {} sizes in --sizes", sizes.len());
        }
        let spec = GeneratorSpec {
            n: self.n,
            intra: self.intra,
            r_grid,
            sizes,
            theta: match self.model {
                Model::Dcsbm => Some(parse_theta(&self.theta)?),
                Model::Sbm => None,
            },
        };
        Ok(match self.model {
            Model::Sbm => Source::Sbm(spec),
            Model::Dcsbm => Source::Dcsbm(spec),
        })
    }
}

fn parse_theta(s: &str) -> Result<(f64, f64)> {
    let params = s
        .strip_prefix("beta:")
        .ok_or_else(|| anyhow!("--theta must look like beta:a,b"))?;
    let (a, b) = params
        .split_once(',')
        .ok_or_else(|| anyhow!("--theta must look like beta:a,b"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

#[derive(Args)]
struct SynthSweep {
    #[command(flatten)]
    model: ModelFlags,
    /// Inter-community probabilities, `start:stop:step` or a single value.
    #[arg(long, default_value = "0:0.3:0.02")]
    r_grid: String,
    #[arg(long, value_enum, default_value_t = TaskArg::Cluster)]
    task: TaskArg,
    /// Split ratios for the classify task.
    #[arg(long, value_delimiter = ',', default_values_t = [5.0, 10.0, 20.0, 50.0])]
    ratios: Vec<f64>,
    #[command(flatten)]
    sweep: SweepFlags,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    model: ModelFlags,
    /// Inter-community probability.
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    edges_out: PathBuf,
    #[arg(long)]
    labels_out: PathBuf,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    data: DataSource,
    #[arg(long)]
    method: Method,
    #[arg(long, value_enum, default_value_t = TaskArg::Cluster)]
    task: TaskArg,
    /// Train+val pool size in percent, for the classify task.
    #[arg(long, default_value_t = 50.0)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the network input features (GNN, GG, GG-C) here.
    #[arg(long)]
    features_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    train: TrainFlags,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's output path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "GNNSEED_THREADS")]
    threads: Option<usize>,
}

fn build_config(task: Task, source: Source, ratios: Option<Vec<f64>>, sweep: &SweepFlags) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(task, source);
    cfg.methods = sweep.methods.clone();
    if let Some(r) = ratios {
        cfg.ratios = r;
    }
    cfg.trials = sweep.trials;
    cfg.base_seed = sweep.seed;
    cfg.threads = sweep.threads;
    sweep.train.apply(&mut cfg.train);
    cfg.output = sweep.out.clone().map(|path| OutputSpec {
        path,
        format: sweep.format.into(),
    });
    cfg
}

fn summarize(report: &RunReport) {
    let mut err = std::io::stderr().lock();
    for a in &report.aggregates {
        let mut key = format!("{} {}", a.dataset, a.method);
        if let Some(ratio) = a.ratio {
            key.push_str(&format!(" ratio={ratio}%"));
        }
        if let Some(r) = a.r {
            key.push_str(&format!(" r={r}"));
        }
        let value = match (a.mean, a.stderr) {
            (Some(m), Some(s)) => format!("{m:.4} ± {s:.4}"),
            (Some(m), None) => format!("{m:.4}"),
            _ => "n/a".into(),
        };
        let failed = if a.failed > 0 { format!(", {} failed", a.failed) } else { String::new() };
        let _ = writeln!(err, "{key}: {value} (n={}{failed})", a.count);
    }
    for row in report.failed_rows() {
        let _ = writeln!(
            err,
            "failed: {} trial {} seed {}: {}",
            row.method,
            row.trial,
            row.seed,
            row.error.as_deref().unwrap_or("")
        );
    }
}

fn execute(cfg: ExperimentConfig, print_config: bool, format: Format) -> Result<ExitCode> {
    if print_config {
        print!("{}", cfg.to_toml_string()?);
        return Ok(ExitCode::SUCCESS);
    }
    let report = run_experiment(&cfg)?;
    if cfg.output.is_none() {
        let stdout = std::io::stdout().lock();
        match format {
            Format::Csv => report.write_csv(stdout)?,
            Format::Json => report.write_json(stdout)?,
        }
    }
    summarize(&report);
    Ok(if report.has_failures() { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn embed(args: &EmbedArgs) -> Result<()> {
    let d = args.data.load()?;
    let mut cfg = MethodConfig::default();
    args.train.apply(&mut cfg);
    let res = match args.task {
        TaskArg::Cluster => cluster(args.method, &d.graph, d.k(), Some(&d.labels), &cfg, args.seed)?,
        TaskArg::Classify => {
            let masks = split_nodes(&d.labels, SplitRatio(args.ratio), &mut stage_rng(args.seed, Stage::Split))?;
            classify(args.method, &d.graph, &d.labels, &masks, &cfg, args.seed)?
        }
    };
    let write = |path: &PathBuf, data| -> Result<()> {
        let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Embedding::new(data)?.write_csv(std::io::BufWriter::new(file))?;
        Ok(())
    };
    write(&args.out, res.embedding)?;
    if let Some(path) = &args.features_out {
        let features = res
            .input_features
            .ok_or_else(|| anyhow!("method {} has no network input features", args.method))?;
        write(path, features)?;
    }
    if let Some(m) = res.metric {
        eprintln!("{} {}: {m:.4}", d.name, args.method);
    }
    Ok(())
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let source = args.model.spec(RGrid(vec![args.r]))?;
    let (spec, dc) = source.generator().expect("generator source");
    let bm = spec.block_model(args.r, dc);
    bm.validate()?;
    let mut rng = stage_rng(args.seed, Stage::Graph);
    let (g, y) = if dc {
        let s = sample_dcsbm(&bm, &mut rng)?;
        (s.graph, s.labels)
    } else {
        sample_sbm(&bm, &mut rng)?
    };
    write_edge_list(&g, &args.edges_out)?;
    write_labels(&y, &args.labels_out)?;
    eprintln!("n={} m={} K={}", g.n(), g.m(), y.k());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Cluster(a) => {
            let cfg = build_config(Task::Cluster, a.data.source()?, None, &a.sweep);
            execute(cfg, a.sweep.print_config, a.sweep.format)
        }
        Command::Classify(a) => {
            let cfg = build_config(Task::Classify, a.data.source()?, Some(a.ratios.clone()), &a.sweep);
            execute(cfg, a.sweep.print_config, a.sweep.format)
        }
        Command::Synth(a) => {
            let source = a.model.spec(RGrid::parse(&a.r_grid)?)?;
            let cfg = build_config(a.task.into(), source, Some(a.ratios.clone()), &a.sweep);
            execute(cfg, a.sweep.print_config, a.sweep.format)
        }
        Command::Generate(a) => generate(&a).map(|()| ExitCode::SUCCESS),
        Command::Embed(a) => embed(&a).map(|()| ExitCode::SUCCESS),
        Command::Run(a) => {
            let mut cfg = ExperimentConfig::from_path(&a.config)?;
            if let Some(path) = a.out {
                let format = cfg.output.as_ref().map(|o| o.format).unwrap_or_default();
                cfg.output = Some(OutputSpec { path, format });
            }
            if a.threads.is_some() {
                cfg.threads = a.threads;
            }
            let format = match cfg.output.as_ref().map(|o| o.format) {
                Some(OutputFormat::Json) => Format::Json,
                _ => Format::Csv,
            };
            execute(cfg, false, format)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
