//! Seeded experiment harness: runs the four algorithms over paired seeds on
//! one dataset and renders the resulting Jc table as CSV.
//!
//! Configuration is a flat `key=value` text whose keys mirror the CLI's long
//! flags (`k=3`, `algo=kmeans,igk`, `label-col=4`, ...). Blank lines and lines
//! starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{impute_local_mean, load_csv, pca_fit, pca_transform, CsvOptions, Dataset, Delimiter};
use crate::error::{ClusterError, Result};
use crate::gaclust::{ga_cluster, GaParams};
use crate::kmeans::{kmeans, KmeansParams, Tolerance};
use crate::metric::{ClusterModel, MetricMode};
use crate::refine::{igk, improved_kmeans, RefineParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Kmeans,
    Ga,
    ImprovedKmeans,
    Igk,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Kmeans, Algorithm::Ga, Algorithm::ImprovedKmeans, Algorithm::Igk];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Kmeans => "kmeans",
            Algorithm::Ga => "ga",
            Algorithm::ImprovedKmeans => "improved_kmeans",
            Algorithm::Igk => "igk",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = ClusterError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| ClusterError::invalid(format!("unknown algorithm {s:?} (expected kmeans, ga, improved_kmeans or igk)")))
    }
}

/// Where the data comes from and how it is preprocessed: missing values are
/// always imputed, then columns are selected, then PCA is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub csv: CsvOptions,
    /// Feature columns to keep (indices after the label column is removed).
    pub columns: Option<Vec<usize>>,
    pub pca_threshold: Option<f64>,
    pub standardize: bool,
}

impl DatasetSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            csv: CsvOptions::default(),
            columns: None,
            pca_threshold: None,
            standardize: false,
        }
    }
}

/// Imputes, selects columns and reduces `raw` according to `spec`.
pub fn preprocess(raw: &Dataset, spec: &DatasetSpec) -> Result<Dataset> {
    let mut data = impute_local_mean(raw)?;
    if let Some(cols) = &spec.columns {
        data = data.select_columns(cols)?;
    }
    if let Some(threshold) = spec.pca_threshold {
        let model = pca_fit(&data, threshold, spec.standardize)?;
        data = pca_transform(&model, &data)?;
    }
    Ok(data)
}

pub fn prepare_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    preprocess(&load_csv(&spec.path, &spec.csv)?, spec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub k: usize,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    pub base_seed: u64,
    pub kmeans: KmeansParams,
    pub ga: GaParams,
    pub k_prime: usize,
    pub subsamples: usize,
    pub metric_mode: MetricMode,
    pub medoid_snap: bool,
    pub converge_after_merge: bool,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults: all four algorithms, five trials from seed 0, K′ = 2k, four
    /// subsamples, unsquared Jc.
    pub fn new(dataset: DatasetSpec, k: usize) -> Self {
        let refine = RefineParams::new(k);
        Self {
            dataset,
            k,
            algorithms: Algorithm::ALL.to_vec(),
            trials: 5,
            base_seed: 0,
            kmeans: KmeansParams::default(),
            ga: GaParams::default(),
            k_prime: refine.k_prime,
            subsamples: refine.j_subsamples,
            metric_mode: MetricMode::Unsquared,
            medoid_snap: false,
            converge_after_merge: true,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(ClusterError::invalid("--k must be at least 1"));
        }
        if self.k_prime <= self.k {
            return Err(ClusterError::invalid(format!(
                "--kprime ({}) must be greater than --k ({})",
                self.k_prime, self.k
            )));
        }
        if self.trials == 0 {
            return Err(ClusterError::invalid("--trials must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(ClusterError::invalid("--algo must name at least one algorithm"));
        }
        if self.subsamples == 0 {
            return Err(ClusterError::invalid("--subsamples must be at least 1"));
        }
        self.kmeans.validate()?;
        self.ga.validate()
    }

    pub fn refine_params(&self) -> RefineParams {
        RefineParams {
            k_prime: self.k_prime,
            j_subsamples: self.subsamples,
            kmeans: self.kmeans_params(),
            ga: self.ga,
            metric_mode: self.metric_mode,
            medoid_snap: self.medoid_snap,
            converge_after_merge: self.converge_after_merge,
            ..RefineParams::new(self.k)
        }
    }

    fn kmeans_params(&self) -> KmeansParams {
        KmeansParams {
            metric_mode: self.metric_mode,
            ..self.kmeans
        }
    }

    /// Builds a config from `key=value` settings. `data` and `k` are required.
    pub fn from_settings(settings: &BTreeMap<String, String>) -> Result<Self> {
        let get = |key: &str| settings.get(key).map(String::as_str);
        fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| ClusterError::invalid(format!("--{key}: cannot parse {v:?}")))
        }
        fn flag(key: &str, v: &str) -> Result<bool> {
            match v {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(ClusterError::invalid(format!("--{key}: expected true or false, got {v:?}"))),
            }
        }
        for key in settings.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ClusterError::invalid(format!("unknown setting {key:?}")));
            }
        }

        let path = get("data").ok_or_else(|| ClusterError::invalid("--data is required"))?;
        let k: usize = parse("k", get("k").ok_or_else(|| ClusterError::invalid("--k is required"))?)?;
        let mut ds = DatasetSpec::new(path);
        if let Some(v) = get("label-col") {
            ds.csv.label_column = Some(parse("label-col", v)?);
        }
        if let Some(v) = get("missing-token") {
            ds.csv.missing_token = v.to_owned();
        }
        if let Some(v) = get("header") {
            ds.csv.has_header = flag("header", v)?;
        }
        if let Some(v) = get("delimiter") {
            ds.csv.delimiter = match v {
                "comma" | "," => Delimiter::Comma,
                "whitespace" | "space" => Delimiter::Whitespace,
                other => return Err(ClusterError::invalid(format!("--delimiter: unknown {other:?}"))),
            };
        }
        if let Some(v) = get("columns") {
            ds.columns = Some(
                v.split(',')
                    .map(|c| parse("columns", c.trim()))
                    .collect::<Result<Vec<usize>>>()?,
            );
        }
        if let Some(v) = get("pca") {
            ds.pca_threshold = Some(parse("pca", v)?);
        }
        if let Some(v) = get("standardize") {
            ds.standardize = flag("standardize", v)?;
        }

        let mut cfg = ExperimentConfig::new(ds, k);
        if let Some(v) = get("algo") {
            cfg.algorithms = v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<Result<_>>()?;
        }
        if let Some(v) = get("kprime") {
            cfg.k_prime = parse("kprime", v)?;
        }
        if let Some(v) = get("subsamples") {
            cfg.subsamples = parse("subsamples", v)?;
        }
        if let Some(v) = get("trials") {
            cfg.trials = parse("trials", v)?;
        }
        if let Some(v) = get("seed") {
            cfg.base_seed = parse("seed", v)?;
        }
        if let Some(v) = get("metric") {
            cfg.metric_mode = v.parse()?;
        }
        if let Some(v) = get("generations") {
            cfg.ga.generations = parse("generations", v)?;
        }
        if let Some(v) = get("pop") {
            cfg.ga.population_size = parse("pop", v)?;
        }
        if let Some(v) = get("pc") {
            cfg.ga.crossover_prob = parse("pc", v)?;
        }
        if let Some(v) = get("pm") {
            cfg.ga.mutation_prob = parse("pm", v)?;
        }
        if let Some(v) = get("elitism") {
            cfg.ga.elitism = parse("elitism", v)?;
        }
        if let Some(v) = get("epsilon") {
            cfg.kmeans.epsilon = Tolerance::Absolute(parse("epsilon", v)?);
        }
        if let Some(v) = get("max-iters") {
            cfg.kmeans.max_iterations = parse("max-iters", v)?;
        }
        if let Some(v) = get("medoid") {
            cfg.medoid_snap = flag("medoid", v)?;
        }
        if let Some(v) = get("single-pass-merge") {
            cfg.converge_after_merge = !flag("single-pass-merge", v)?;
        }
        if let Some(v) = get("out") {
            cfg.output = Some(PathBuf::from(v));
        }
        if get("kprime").is_none() {
            cfg.k_prime = 2 * k;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Every key accepted by [`ExperimentConfig::from_settings`].
pub const KNOWN_KEYS: &[&str] = &[
    "algo",
    "data",
    "label-col",
    "missing-token",
    "header",
    "delimiter",
    "columns",
    "pca",
    "standardize",
    "k",
    "kprime",
    "subsamples",
    "trials",
    "seed",
    "metric",
    "generations",
    "pop",
    "pc",
    "pm",
    "elitism",
    "epsilon",
    "max-iters",
    "medoid",
    "single-pass-merge",
    "out",
];

/// Parses `key=value` lines.
pub fn parse_settings(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ClusterError::invalid(format!("config line {}: expected key=value", i + 1)))?;
        out.insert(key.trim().to_owned(), value.trim().to_owned());
    }
    Ok(out)
}

/// Jc of every algorithm for every trial, plus run metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTable {
    pub dataset: String,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub k_prime: usize,
    pub subsamples: usize,
    pub metric_mode: MetricMode,
    pub ga: GaParams,
    pub max_iterations: usize,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    /// `rows[trial][algorithm]`.
    pub rows: Vec<Vec<f64>>,
    /// Wall-clock seconds per cell, same layout as `rows`.
    pub seconds: Vec<Vec<f64>>,
}

impl TrialTable {
    pub fn averages(&self) -> Vec<f64> {
        (0..self.algorithms.len())
            .map(|c| self.rows.iter().map(|r| r[c]).sum::<f64>() / self.rows.len() as f64)
            .collect()
    }

    pub fn column(&self, algorithm: Algorithm) -> Option<Vec<f64>> {
        let c = self.algorithms.iter().position(|&a| a == algorithm)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }

    pub fn average(&self, algorithm: Algorithm) -> Option<f64> {
        let col = self.column(algorithm)?;
        Some(col.iter().sum::<f64>() / col.len() as f64)
    }

    /// Human-readable per-cell timings.
    pub fn timing_summary(&self) -> String {
        let mut s = String::new();
        for (t, row) in self.seconds.iter().enumerate() {
            let cells: Vec<String> = self
                .algorithms
                .iter()
                .zip(row)
                .map(|(a, secs)| format!("{a}={secs:.3}s"))
                .collect();
            s.push_str(&format!("trial {} (seed {}): {}\n", t + 1, self.seeds[t], cells.join(" ")));
        }
        s
    }

    /// Renders the table: `#` metadata lines, a header, one row per trial and
    /// a final `average` row. Values carry six significant digits. Timings
    /// are left out so identical configs give identical bytes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# dataset={} n={} d={}", self.dataset, self.n, self.d)?;
        writeln!(
            w,
            "# k={} k_prime={} subsamples={} metric={}",
            self.k, self.k_prime, self.subsamples, self.metric_mode
        )?;
        writeln!(
            w,
            "# generations={} population={} pc={} pm={} elitism={} max_iterations={}",
            self.ga.generations,
            self.ga.population_size,
            self.ga.crossover_prob,
            self.ga.mutation_prob,
            self.ga.elitism,
            self.max_iterations
        )?;
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        writeln!(w, "# seeds={}", seeds.join(","))?;
        let names: Vec<&str> = self.algorithms.iter().map(|a| a.name()).collect();
        writeln!(w, "trial,{}", names.join(","))?;
        for (t, row) in self.rows.iter().enumerate() {
            writeln!(w, "{},{}", t + 1, join_sig(row))?;
        }
        writeln!(w, "average,{}", join_sig(&self.averages()))?;
        Ok(())
    }
}

fn join_sig(values: &[f64]) -> String {
    values.iter().map(|&v| format_sig(v, 6)).collect::<Vec<_>>().join(",")
}

/// Formats `x` with `sig` significant digits in plain decimal notation.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = sig as i32 - 1 - magnitude;
    if decimals >= 0 {
        format!("{:.*}", decimals as usize, x)
    } else {
        let unit = 10f64.powi(-decimals);
        format!("{:.0}", (x / unit).round() * unit)
    }
}

pub fn emit_csv(table: &TrialTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| ClusterError::Io {
        path: path.to_owned(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    table.write_csv(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Runs one algorithm with a fresh generator seeded by `seed`.
pub fn run_cell(algorithm: Algorithm, data: &Dataset, config: &ExperimentConfig, seed: u64) -> Result<ClusterModel> {
    let points = data.points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match algorithm {
        Algorithm::Kmeans => kmeans(points, config.k, &config.kmeans_params(), &mut rng),
        Algorithm::Ga => ga_cluster(points, config.k, &config.ga, config.metric_mode, &mut rng),
        Algorithm::ImprovedKmeans => improved_kmeans(points, &config.refine_params(), &mut rng),
        Algorithm::Igk => igk(points, &config.refine_params(), &mut rng),
    }
}

/// Runs every requested algorithm for every trial on an already prepared
/// dataset. Trial `t` seeds all algorithms with `base_seed + t`.
pub fn run_experiment_on(data: &Dataset, config: &ExperimentConfig) -> Result<TrialTable> {
    config.validate()?;
    let seeds: Vec<u64> = (0..config.trials as u64).map(|t| config.base_seed + t).collect();
    let mut rows = Vec::with_capacity(seeds.len());
    let mut seconds = Vec::with_capacity(seeds.len());
    for &seed in &seeds {
        let mut row = Vec::with_capacity(config.algorithms.len());
        let mut times = Vec::with_capacity(config.algorithms.len());
        for &algo in &config.algorithms {
            let start = Instant::now();
            let model = run_cell(algo, data, config, seed).map_err(|e| {
                ClusterError::invalid(format!("{algo} failed on seed {seed}: {e}"))
            })?;
            times.push(start.elapsed().as_secs_f64());
            row.push(model.jc);
        }
        rows.push(row);
        seconds.push(times);
    }
    Ok(TrialTable {
        dataset: data.name().to_owned(),
        n: data.n(),
        d: data.d(),
        k: config.k,
        k_prime: config.k_prime,
        subsamples: config.subsamples,
        metric_mode: config.metric_mode,
        ga: config.ga,
        max_iterations: config.kmeans.max_iterations,
        algorithms: config.algorithms.clone(),
        seeds,
        rows,
        seconds,
    })
}

/// Loads and preprocesses the configured dataset, then runs the experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<TrialTable> {
    config.validate()?;
    let data = prepare_dataset(&config.dataset)?;
    run_experiment_on(&data, config)
}
