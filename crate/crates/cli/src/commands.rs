//! The subcommands.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use eotmaps::embedding::embed;
use eotmaps::metrics::DEFAULT_NEIGHBORS;
use eotmaps::{
    davies_bouldin, jaccard_concordance, kmeans, neighbor_purity, rand_index, select_dimension,
    silhouette_mean, simulate::simulate_preset_unchecked, spectral_model, transport_plan,
    Bandwidth, DiffusionContext, KMeansOptions, SinkhornOptions,
};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::config::SimulationConfig;
use crate::error::{CliError, Result};
use crate::io::{self, CsvFormat, Output};

/// Paths written by `simulate`.
#[derive(Debug, Clone)]
pub struct SimulateOutputs {
    pub x: PathBuf,
    pub y: PathBuf,
    pub latent: PathBuf,
    pub labels: PathBuf,
}

/// Writes both observed datasets, the stacked latent points, and one label
/// per stacked point: the cluster for `clustering`, the dataset id otherwise.
pub fn simulate(config: &Path, seed: Option<u64>, out: &SimulateOutputs) -> Result<()> {
    let cfg = SimulationConfig::load(config)?;
    let preset = cfg.preset()?;
    let pair = simulate_preset_unchecked(preset, cfg.m, cfg.n, cfg.p, seed.unwrap_or(cfg.seed))?;
    io::write_matrix(&out.x, pair.x.as_matrix())?;
    io::write_matrix(&out.y, pair.y.as_matrix())?;
    io::write_matrix(&out.latent, pair.latent_stacked()?.as_matrix())?;
    let labels = pair.labels_stacked().unwrap_or_else(|| {
        (0..cfg.m + cfg.n)
            .map(|i| usize::from(i >= cfg.m))
            .collect()
    });
    io::write_labels(&out.labels, &labels)
}

/// Embedding dimension flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QChoice {
    Auto,
    Fixed(usize),
}

impl std::str::FromStr for QChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(QChoice::Auto);
        }
        s.parse()
            .map(QChoice::Fixed)
            .map_err(|_| format!("expected a positive integer or 'auto', got '{s}'"))
    }
}

/// Parses the `--epsilon` flag.
pub fn parse_bandwidth(s: &str) -> std::result::Result<Bandwidth, String> {
    if s.eq_ignore_ascii_case("median") {
        return Ok(Bandwidth::Median);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(Bandwidth::Fixed(v)),
        _ => Err(format!("expected a positive number or 'median', got '{s}'")),
    }
}

#[derive(Debug, Clone)]
pub struct EmbedArgs {
    pub x: PathBuf,
    pub y: PathBuf,
    pub q: QChoice,
    pub t: f64,
    pub bandwidth: Bandwidth,
    pub sinkhorn: SinkhornOptions,
    pub out_embedding: PathBuf,
    pub out_spectrum: PathBuf,
}

/// Embeds both datasets and writes the embedding and the full spectrum.
pub fn embed_command(args: &EmbedArgs, format: CsvFormat) -> Result<()> {
    let x = io::read_data(&args.x, format)?;
    let y = io::read_data(&args.y, format)?;
    let plan = transport_plan(&x, &y, args.bandwidth, &args.sinkhorn)?;
    let model = spectral_model(&plan, plan.rows())?;
    let q = match args.q {
        QChoice::Fixed(q) => q,
        QChoice::Auto => {
            let sel = select_dimension(
                model.values().as_slice(),
                eotmaps::embedding::DEFAULT_EIGENGAP,
            )?;
            if sel.degenerate {
                eprintln!("q = {} (no eigengap reached the threshold)", sel.q);
            } else {
                eprintln!("q = {} (eigengap)", sel.q);
            }
            sel.q
        }
    };
    let emb = embed(&model, q, args.t)?;
    if emb.near_degenerate {
        eprintln!(
            "warning: s_{} and s_{} coincide; the last coordinate is defined only up to rotation",
            q + 1,
            q + 2
        );
    }

    let mut out = Output::create(&args.out_embedding)?;
    let mut header = vec!["dataset".to_string(), "index".to_string()];
    header.extend((1..=q).map(|k| format!("coord_{k}")));
    out.line(&header)?;
    for (dataset, block) in [&emb.x, &emb.y].into_iter().enumerate() {
        for (index, row) in block.row_iter().enumerate() {
            let mut fields = vec![dataset.to_string(), index.to_string()];
            fields.extend(row.iter().map(|v| io::real(*v)));
            out.line(&fields)?;
        }
    }
    out.finish()?;
    io::write_spectrum(&args.out_spectrum, model.values().as_slice())
}

/// Metrics understood by `evaluate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Metric {
    Concordance,
    Rand,
    Db,
    Silhouette,
    Purity,
}

impl Metric {
    fn name(self) -> &'static str {
        match self {
            Metric::Concordance => "concordance",
            Metric::Rand => "rand",
            Metric::Db => "db",
            Metric::Silhouette => "silhouette",
            Metric::Purity => "purity",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvaluateArgs {
    pub embedding: PathBuf,
    pub metric: Metric,
    pub latent: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub batch: bool,
    pub predicted: Option<PathBuf>,
    pub clusters: Option<usize>,
    pub k: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Layout of the latent and label files.
    pub format: CsvFormat,
}

impl Default for EvaluateArgs {
    fn default() -> Self {
        Self {
            embedding: PathBuf::new(),
            metric: Metric::Concordance,
            latent: None,
            labels: None,
            batch: false,
            predicted: None,
            clusters: None,
            k: DEFAULT_NEIGHBORS,
            seed: 0,
            out: None,
            format: CsvFormat::default(),
        }
    }
}

fn check_rows(what: &str, got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "{what} has {got} rows, the embedding has {expected}"
        )))
    }
}

fn point_labels(args: &EvaluateArgs, dataset: &[usize]) -> Result<(Vec<usize>, &'static str)> {
    match (&args.labels, args.batch) {
        (Some(_), true) => Err(CliError::Input(
            "give either --labels or --batch, not both".into(),
        )),
        (Some(path), false) => {
            let labels = io::read_labels(path, args.format)?;
            check_rows("labels file", labels.len(), dataset.len())?;
            Ok((labels, "labels"))
        }
        (None, true) => Ok((dataset.to_vec(), "dataset")),
        (None, false) => Err(CliError::Input(format!(
            "metric '{}' needs --labels or --batch",
            args.metric.name()
        ))),
    }
}

/// Computes one metric on an embedding file and returns the JSON report.
pub fn evaluate(args: &EvaluateArgs) -> Result<Value> {
    let emb = io::read_embedding(&args.embedding)?;
    let points = &emb.coords;
    let rows = points.nrows();
    let mut params = serde_json::Map::new();
    params.insert("points".into(), json!(rows));
    params.insert("dimension".into(), json!(points.ncols()));
    let value = match args.metric {
        Metric::Concordance => {
            let path = args
                .latent
                .as_ref()
                .ok_or_else(|| CliError::Input("metric 'concordance' needs --latent".into()))?;
            let latent: DMatrix<f64> = io::read_matrix(path, args.format)?;
            check_rows("latent file", latent.nrows(), rows)?;
            params.insert("k".into(), json!(args.k));
            jaccard_concordance(points, &latent, args.k)?
        }
        Metric::Rand => {
            let path = args.labels.as_ref().ok_or_else(|| {
                CliError::Input("metric 'rand' needs --labels with the true labels".into())
            })?;
            let truth = io::read_labels(path, args.format)?;
            check_rows("labels file", truth.len(), rows)?;
            let predicted = match &args.predicted {
                Some(p) => {
                    let predicted = io::read_labels(p, args.format)?;
                    check_rows("predicted labels file", predicted.len(), rows)?;
                    params.insert("predicted".into(), json!("file"));
                    predicted
                }
                None => {
                    let clusters = args
                        .clusters
                        .unwrap_or_else(|| truth.iter().collect::<BTreeSet<_>>().len());
                    params.insert("predicted".into(), json!("kmeans"));
                    params.insert("clusters".into(), json!(clusters));
                    params.insert("seed".into(), json!(args.seed));
                    kmeans(points, clusters, args.seed, &KMeansOptions::default())?.labels
                }
            };
            rand_index(&truth, &predicted)?
        }
        Metric::Db | Metric::Silhouette | Metric::Purity => {
            let (labels, source) = point_labels(args, &emb.dataset)?;
            params.insert("label_source".into(), json!(source));
            match args.metric {
                Metric::Db => davies_bouldin(points, &labels)?,
                Metric::Silhouette => silhouette_mean(points, &labels)?,
                _ => {
                    params.insert("k".into(), json!(args.k));
                    neighbor_purity(points, &labels, args.k)?
                }
            }
        }
    };
    let mut report = json!({
        "metric": args.metric.name(),
        "value": if value.is_finite() { json!(value) } else { Value::Null },
        "params": params,
    });
    if value.is_infinite() {
        report["infinite"] = json!(true);
    }
    Ok(report)
}

pub fn write_report(report: &Value, out: Option<&Path>) -> Result<()> {
    let text = format!(
        "{}\n",
        serde_json::to_string_pretty(report).expect("JSON values serialize")
    );
    match out {
        Some(path) => io::write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Debug, Clone)]
pub struct DistancesArgs {
    pub x: PathBuf,
    pub y: PathBuf,
    pub bandwidth: Bandwidth,
    pub sinkhorn: SinkhornOptions,
    pub t: u32,
    pub pairs: PathBuf,
    pub out: PathBuf,
}

/// Diffusion distances for the requested `(kind, i, j)` rows.
pub fn distances(args: &DistancesArgs, format: CsvFormat) -> Result<()> {
    let pairs = io::read_pairs(&args.pairs, format)?;
    let x = io::read_data(&args.x, format)?;
    let y = io::read_data(&args.y, format)?;
    let plan = transport_plan(&x, &y, args.bandwidth, &args.sinkhorn)?;
    let ctx = DiffusionContext::new(&plan, args.t)?;
    let values = pairs
        .iter()
        .map(|&(kind, i, j)| ctx.distance(kind, i, j))
        .collect::<eotmaps::Result<Vec<_>>>()?;
    let mut out = Output::create(&args.out)?;
    out.line(&["kind".into(), "i".into(), "j".into(), "distance".into()])?;
    for ((kind, i, j), d) in pairs.iter().zip(values) {
        out.line(&[kind.to_string(), i.to_string(), j.to_string(), io::real(d)])?;
    }
    out.finish()
}

/// Singular values of the plan, `k,s_k`, for inspection without embedding.
pub fn spectrum(
    x: &Path,
    y: &Path,
    bandwidth: Bandwidth,
    sinkhorn: &SinkhornOptions,
    out: &Path,
    format: CsvFormat,
) -> Result<()> {
    let x = io::read_data(x, format)?;
    let y = io::read_data(y, format)?;
    let plan = transport_plan(&x, &y, bandwidth, sinkhorn)?;
    let model = spectral_model(&plan, plan.rows())?;
    eprintln!(
        "epsilon = {:e}, {} sweeps, marginal residual {:e}",
        plan.epsilon(),
        plan.iterations(),
        plan.relative_residual()
    );
    io::write_spectrum(out, model.values().as_slice())
}
