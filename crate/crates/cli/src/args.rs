use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spacobi::{ProxKind, Scaling};

#[derive(Debug, Parser)]
#[command(name = "spacobi", version, about = "Sparse convex biclustering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one penalty setting and write result.json and A_hat.csv.
    Fit(FitArgs),
    /// Write checkerboard replicates with truth sidecars.
    Simulate(SimulateArgs),
    /// Search a (γ, γ3) grid and select a point.
    Tune(TuneArgs),
    /// Trace FNR and FPR along a γ3 ladder.
    Path(PathArgs),
    /// Score a result.json against a truth sidecar.
    Eval(EvalArgs),
    /// Render a CSV matrix as a grayscale PGM.
    Heatmap(HeatmapArgs),
}

fn parse_q(s: &str) -> Result<ProxKind, String> {
    s.parse().map_err(|e: spacobi::prox::ProxError| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalingArg {
    None,
    Unit,
    CenterUnit,
}

impl From<ScalingArg> for Scaling {
    fn from(s: ScalingArg) -> Self {
        match s {
            ScalingArg::None => Scaling::None,
            ScalingArg::Unit => Scaling::Unit,
            ScalingArg::CenterUnit => Scaling::CenterUnit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Bootstrap clustering stability.
    Stability,
    /// Row ARI on a labelled validation matrix.
    Ari,
}

/// Options shared by every command that fits.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fusion norm: 1, 2 or inf.
    #[arg(long, value_parser = parse_q)]
    pub q: Option<ProxKind>,
    #[arg(long)]
    pub nu1: Option<f64>,
    #[arg(long)]
    pub nu2: Option<f64>,
    #[arg(long)]
    pub nu3: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Nearest neighbours per entity in the weight graph.
    #[arg(long)]
    pub neighbors: Option<usize>,
    /// Gaussian kernel bandwidth.
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long, value_enum)]
    pub scaling: Option<ScalingArg>,
    /// Cluster-extraction threshold.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Adaptive feature factors from a γ3 = 0 pilot fit.
    #[arg(long)]
    pub adaptive: Option<bool>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Shared row and column fusion penalty.
    #[arg(long, conflicts_with_all = ["gamma1", "gamma2"])]
    pub gamma: Option<f64>,
    #[arg(long, requires = "gamma2")]
    pub gamma1: Option<f64>,
    #[arg(long, requires = "gamma1")]
    pub gamma2: Option<f64>,
    /// Feature sparsity penalty.
    #[arg(long)]
    pub gamma3: Option<f64>,
    /// Truth sidecar from `simulate`; adds ARI and selection rates.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Also write heatmap.pgm.
    #[arg(long)]
    pub heatmap: bool,
    /// Warm-start from a saved state.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Save the final state as state.json.
    #[arg(long)]
    pub save_state: bool,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub p_true: Option<usize>,
    /// Row classes.
    #[arg(long)]
    pub k: Option<usize>,
    /// Column classes among informative features.
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub noise_variance: Option<f64>,
    /// Replicate r uses seed base + r.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Also write a validation matrix per replicate.
    #[arg(long)]
    pub validation: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TuneArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub select: Option<Selection>,
    /// Comma-separated γ ladder (γ1 in three-parameter mode).
    #[arg(long, value_delimiter = ',')]
    pub gamma_ladder: Option<Vec<f64>>,
    /// Comma-separated γ2 ladder; switches to three-parameter mode.
    #[arg(long, value_delimiter = ',')]
    pub gamma2_ladder: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub gamma3_ladder: Option<Vec<f64>>,
    /// Validation matrix for ARI selection.
    #[arg(long)]
    pub val: Option<PathBuf>,
    /// Truth sidecar holding the validation row labels.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub bootstraps: Option<usize>,
    /// Also run every ladder from cold starts and report both totals.
    #[arg(long)]
    pub compare_cold: bool,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PathArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Truth sidecar with the informative-feature mask.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub gamma3_ladder: Option<Vec<f64>>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub result: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Write eval.json here instead of printing.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct HeatmapArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}
