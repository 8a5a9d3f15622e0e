use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use evoclust::bench::{parse_settings, run_experiment, ExperimentConfig};
use evoclust::dataset::{impute_local_mean, load_csv, pca_fit, pca_transform};
use evoclust::metric::{assign, compute_jc};
use evoclust::{ClusterError, CsvOptions, Delimiter, MetricMode};

#[derive(Parser)]
#[command(name = "evoclust", version, about = "Partitional clustering benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seeded benchmark and write a trial table as CSV.
    Run(RunArgs),
    /// Evaluate Jc for a fixed set of centers.
    Jc(JcArgs),
    /// Fit PCA and report the retained variance.
    Pca(PcaArgs),
    /// Fill missing values with same-class feature means.
    Impute(ImputeArgs),
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    data: PathBuf,
    /// Zero-based column holding the class label.
    #[arg(long)]
    label_col: Option<usize>,
    #[arg(long, default_value = "?")]
    missing_token: String,
    /// The first line is a header.
    #[arg(long)]
    header: bool,
    /// Split on runs of whitespace instead of commas.
    #[arg(long)]
    whitespace: bool,
}

impl InputArgs {
    fn options(&self) -> CsvOptions {
        CsvOptions {
            label_column: self.label_col,
            missing_token: self.missing_token.clone(),
            has_header: self.header,
            delimiter: if self.whitespace { Delimiter::Whitespace } else { Delimiter::Comma },
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// File of key=value lines; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated subset of kmeans, ga, improved_kmeans, igk.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    data: Option<String>,
    #[arg(long)]
    label_col: Option<usize>,
    #[arg(long)]
    missing_token: Option<String>,
    #[arg(long)]
    header: bool,
    /// comma or whitespace
    #[arg(long)]
    delimiter: Option<String>,
    /// Comma-separated feature columns to keep.
    #[arg(long)]
    columns: Option<String>,
    /// Keep principal components up to this cumulative variance ratio.
    #[arg(long)]
    pca: Option<f64>,
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    k: Option<usize>,
    /// Intermediate cluster count, must exceed k.
    #[arg(long)]
    kprime: Option<usize>,
    #[arg(long)]
    subsamples: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// unsquared or squared
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    pc: Option<f64>,
    #[arg(long)]
    pm: Option<f64>,
    #[arg(long)]
    elitism: Option<usize>,
    /// Absolute k-means convergence tolerance.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Snap final centers to their cluster medoids.
    #[arg(long)]
    medoid: bool,
    /// Stop after the nearest-center merge without re-converging.
    #[arg(long)]
    single_pass_merge: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn settings(&self) -> Result<BTreeMap<String, String>, ClusterError> {
        let mut map = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ClusterError::Io {
                    path: path.clone(),
                    source,
                })?;
                parse_settings(&text)?
            }
            None => BTreeMap::new(),
        };
        let mut set = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                map.insert(key.to_owned(), v);
            }
        };
        let on = |b: bool| b.then(|| "true".to_owned());
        set("algo", self.algo.clone());
        set("data", self.data.clone());
        set("label-col", self.label_col.map(|v| v.to_string()));
        set("missing-token", self.missing_token.clone());
        set("header", on(self.header));
        set("delimiter", self.delimiter.clone());
        set("columns", self.columns.clone());
        set("pca", self.pca.map(|v| v.to_string()));
        set("standardize", on(self.standardize));
        set("k", self.k.map(|v| v.to_string()));
        set("kprime", self.kprime.map(|v| v.to_string()));
        set("subsamples", self.subsamples.map(|v| v.to_string()));
        set("trials", self.trials.map(|v| v.to_string()));
        set("seed", self.seed.map(|v| v.to_string()));
        set("metric", self.metric.clone());
        set("generations", self.generations.map(|v| v.to_string()));
        set("pop", self.pop.map(|v| v.to_string()));
        set("pc", self.pc.map(|v| v.to_string()));
        set("pm", self.pm.map(|v| v.to_string()));
        set("elitism", self.elitism.map(|v| v.to_string()));
        set("epsilon", self.epsilon.map(|v| v.to_string()));
        set("max-iters", self.max_iters.map(|v| v.to_string()));
        set("medoid", on(self.medoid));
        set("single-pass-merge", on(self.single_pass_merge));
        set("out", self.out.as_ref().map(|p| p.display().to_string()));
        Ok(map)
    }
}

#[derive(Args)]
struct JcArgs {
    #[command(flatten)]
    input: InputArgs,
    /// CSV with one center per row.
    #[arg(long)]
    centers: PathBuf,
    #[arg(long, default_value = "unsquared")]
    metric: MetricMode,
}

#[derive(Args)]
struct PcaArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0.99)]
    threshold: f64,
    #[arg(long)]
    standardize: bool,
    /// Write the projected data here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ImputeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, ClusterError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| ClusterError::Io {
            path: p.clone(),
            source,
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(source: io::Error) -> ClusterError {
    ClusterError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn run(args: RunArgs) -> Result<(), ClusterError> {
    let config = ExperimentConfig::from_settings(&args.settings()?)?;
    let table = run_experiment(&config)?;
    let mut w = output(config.output.as_ref())?;
    table.write_csv(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)?;
    eprintln!("{}", table.timing_summary());
    Ok(())
}

fn jc(args: JcArgs) -> Result<(), ClusterError> {
    let data = load_csv(&args.input.data, &args.input.options())?;
    let data = if data.has_missing() { impute_local_mean(&data)? } else { data };
    let centers = load_csv(&args.centers, &CsvOptions::default())?;
    let centers = centers.points();
    let a = assign(data.points(), centers)?;
    println!("{}", compute_jc(data.points(), centers, &a, args.metric)?);
    Ok(())
}

fn pca(args: PcaArgs) -> Result<(), ClusterError> {
    let data = impute_local_mean(&load_csv(&args.input.data, &args.input.options())?)?;
    let model = pca_fit(&data, args.threshold, args.standardize)?;
    let mut cumulative = 0.0;
    println!("component,ratio,cumulative");
    for (i, r) in model.explained_variance_ratio().iter().enumerate() {
        cumulative += r;
        println!("{},{r:.6},{cumulative:.6}", i + 1);
    }
    println!("retained {} of {} dimensions", model.n_components(), model.input_dim());
    if let Some(out) = &args.out {
        pca_transform(&model, &data)?.write_csv(output(Some(out))?, &args.input.missing_token)?;
    }
    Ok(())
}

fn impute(args: ImputeArgs) -> Result<(), ClusterError> {
    let data = impute_local_mean(&load_csv(&args.input.data, &args.input.options())?)?;
    data.write_csv(output(args.out.as_ref())?, &args.input.missing_token)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Jc(a) => jc(a),
        Command::Pca(a) => pca(a),
        Command::Impute(a) => impute(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                ClusterError::InvalidParameter(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
