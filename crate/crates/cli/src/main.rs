//! `eotmaps`: simulate paired datasets, embed them through their entropic
//! transport plan, evaluate embeddings, and compute diffusion distances.
//!
//! Exit codes: 0 on success, 2 for input or config errors, 3 when the
//! numerics fail (Sinkhorn not converged, non-finite duals).

mod commands;
mod config;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eotmaps::metrics::DEFAULT_NEIGHBORS;
use eotmaps::{Bandwidth, SinkhornOptions};

use commands::{
    parse_bandwidth, DistancesArgs, EmbedArgs, EvaluateArgs, Metric, QChoice, SimulateOutputs,
};
use error::{CliError, Result};
use io::CsvFormat;

#[derive(Debug, Parser)]
#[command(
    name = "eotmaps",
    version,
    about = "Joint embeddings from entropic transport plans"
)]
struct Cli {
    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for randomized steps (k-means; overrides the config seed in `simulate`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Field delimiter of input matrix, label, and pairs files.
    #[arg(long, global = true, default_value = ",")]
    delimiter: char,

    /// Input matrix, label, and pairs files start with a header line.
    #[arg(long, global = true)]
    header: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct PlanFlags {
    /// Kernel bandwidth: a positive number or `median`.
    #[arg(long, default_value = "median", value_parser = parse_bandwidth)]
    epsilon: Bandwidth,

    /// Largest relative marginal violation accepted from Sinkhorn.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,

    /// Sinkhorn sweep budget.
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
}

impl PlanFlags {
    fn sinkhorn(&self) -> SinkhornOptions {
        SinkhornOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a preset pair from a JSON config.
    Simulate {
        /// JSON config: schema_version, name, m, n, p, seed, param.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_x: PathBuf,
        #[arg(long)]
        out_y: PathBuf,
        /// Latent points of both datasets, first dataset on top.
        #[arg(long)]
        out_latent: PathBuf,
        /// Cluster labels (clustering preset) or dataset ids, one per latent row.
        #[arg(long)]
        out_labels: PathBuf,
    },
    /// Embed two datasets jointly.
    Embed {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        /// Embedding dimension: a positive integer or `auto` (eigengap rule).
        #[arg(long, default_value = "auto")]
        q: QChoice,
        /// Diffusion time; coordinates are scaled by s_k^t.
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[command(flatten)]
        plan: PlanFlags,
        /// CSV: dataset, index, coord_1..coord_q.
        #[arg(long)]
        out_embedding: PathBuf,
        /// CSV: k, s_k for every singular value of the plan.
        #[arg(long)]
        out_spectrum: PathBuf,
    },
    /// Score an embedding file.
    Evaluate {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long, value_enum)]
        metric: Metric,
        /// Latent points in embedding row order (concordance).
        #[arg(long)]
        latent: Option<PathBuf>,
        /// Point labels in embedding row order (rand, db, silhouette, purity).
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Use the dataset column as labels (db, silhouette, purity).
        #[arg(long)]
        batch: bool,
        /// Predicted labels for rand; k-means on the embedding when absent.
        #[arg(long)]
        predicted: Option<PathBuf>,
        /// k-means cluster count; defaults to the number of distinct true labels.
        #[arg(long)]
        clusters: Option<usize>,
        /// Neighbors for concordance and purity.
        #[arg(long, default_value_t = DEFAULT_NEIGHBORS)]
        k: usize,
        /// JSON report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diffusion distances for (kind, i, j) rows of a pairs file.
    Distances {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        /// Number of diffusion steps, at least 1.
        #[arg(long, default_value_t = 1)]
        t: u32,
        #[command(flatten)]
        plan: PlanFlags,
        /// CSV rows `kind,i,j` with kind XX, YY or XY.
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Singular values of the transport plan.
    Spectrum {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[command(flatten)]
        plan: PlanFlags,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Input(format!("--threads: {e}")))?;
    }
    if !cli.delimiter.is_ascii() {
        return Err(CliError::Input(
            "--delimiter must be a single ASCII character".into(),
        ));
    }
    let format = CsvFormat {
        delimiter: cli.delimiter as u8,
        header: cli.header,
    };
    match cli.command {
        Command::Simulate {
            config,
            out_x,
            out_y,
            out_latent,
            out_labels,
        } => commands::simulate(
            &config,
            cli.seed,
            &SimulateOutputs {
                x: out_x,
                y: out_y,
                latent: out_latent,
                labels: out_labels,
            },
        ),
        Command::Embed {
            x,
            y,
            q,
            t,
            plan,
            out_embedding,
            out_spectrum,
        } => commands::embed_command(
            &EmbedArgs {
                x,
                y,
                q,
                t,
                bandwidth: plan.epsilon,
                sinkhorn: plan.sinkhorn(),
                out_embedding,
                out_spectrum,
            },
            format,
        ),
        Command::Evaluate {
            embedding,
            metric,
            latent,
            labels,
            batch,
            predicted,
            clusters,
            k,
            out,
        } => {
            let args = EvaluateArgs {
                embedding,
                metric,
                latent,
                labels,
                batch,
                predicted,
                clusters,
                k,
                seed: cli.seed.unwrap_or(0),
                out,
                format,
            };
            let report = commands::evaluate(&args)?;
            commands::write_report(&report, args.out.as_deref())
        }
        Command::Distances {
            x,
            y,
            t,
            plan,
            pairs,
            out,
        } => commands::distances(
            &DistancesArgs {
                x,
                y,
                bandwidth: plan.epsilon,
                sinkhorn: plan.sinkhorn(),
                t,
                pairs,
                out,
            },
            format,
        ),
        Command::Spectrum { x, y, plan, out } => {
            commands::spectrum(&x, &y, plan.epsilon, &plan.sinkhorn(), &out, format)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
