use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaitwalk::{DecodeGrammar, HmmConfig, PcaStage, SynthConfig, TakeCounts, Topology};

#[derive(Debug, Parser)]
#[command(name = "gaitwalk", version, about = "Identify people from the sound of their footsteps")]
pub struct Cli {
    /// TOML settings file. Flags given on the command line override it.
    #[arg(long, global = true, env = "GAITWALK_CONFIG")]
    pub config: Option<PathBuf>,
    /// Worker threads for enrollment and evaluation (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic walking-sound corpus and its manifest.
    Synth(SynthArgs),
    /// Train one model per subject from a manifest's enrollment rows.
    Enroll(EnrollArgs),
    /// Identify every identification row of a manifest and report accuracy.
    Evaluate(EvaluateArgs),
    /// Identify the walker in a single recording.
    Identify(IdentifyArgs),
    /// Dump the feature sequence of a recording as JSON.
    Features(FeaturesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GrammarArg {
    /// One pass through the model.
    Single,
    /// Any number of passes.
    Multi,
}

impl From<GrammarArg> for DecodeGrammar {
    fn from(g: GrammarArg) -> Self {
        match g {
            GrammarArg::Single => DecodeGrammar::SinglePass,
            GrammarArg::Multi => DecodeGrammar::MultiStep,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TopologyArg {
    Linear,
    Cyclic,
}

impl From<TopologyArg> for Topology {
    fn from(t: TopologyArg) -> Self {
        match t {
            TopologyArg::Linear => Topology::Linear,
            TopologyArg::Cyclic => Topology::Cyclic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PcaStageArg {
    /// Rotate the full static+delta+acceleration vectors.
    AfterDynamics,
    /// Rotate the static cepstra, then append dynamics.
    BeforeDynamics,
}

impl From<PcaStageArg> for PcaStage {
    fn from(s: PcaStageArg) -> Self {
        match s {
            PcaStageArg::AfterDynamics => PcaStage::AfterDynamics,
            PcaStageArg::BeforeDynamics => PcaStage::BeforeDynamics,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory for recordings and manifest.csv.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = SynthConfig::default().num_subjects)]
    pub subjects: usize,
    #[arg(long, default_value_t = SynthConfig::default().seed)]
    pub seed: u64,
    /// Step-to-background signal-to-noise ratio in dB.
    #[arg(long, default_value_t = SynthConfig::default().snr_db)]
    pub snr_db: f64,
    /// Steps per recording.
    #[arg(long, default_value_t = SynthConfig::default().steps_per_recording)]
    pub steps: usize,
    /// Normal-walk takes per subject.
    #[arg(long, default_value_t = TakeCounts::default().n)]
    pub n_takes: u32,
    /// Backpack takes per subject.
    #[arg(long, default_value_t = TakeCounts::default().b)]
    pub b_takes: u32,
    /// Shoe-cover takes per subject.
    #[arg(long, default_value_t = TakeCounts::default().s)]
    pub s_takes: u32,
    /// Leading normal-walk takes used for enrollment.
    #[arg(long, default_value_t = SynthConfig::default().enrollment_takes)]
    pub enrollment_takes: u32,
    #[arg(long, default_value_t = SynthConfig::default().sample_rate)]
    pub sample_rate: u32,
}

/// Feature and model settings used when training.
#[derive(Debug, Args)]
pub struct TrainArgs {
    /// HMM states per model.
    #[arg(long, default_value_t = HmmConfig::default().num_states)]
    pub states: usize,
    /// Re-estimation iterations.
    #[arg(long, default_value_t = HmmConfig::default().training_iterations)]
    pub iterations: usize,
    #[arg(long, value_enum, default_value_t = TopologyArg::Cyclic)]
    pub topology: TopologyArg,
    /// Skip the PCA rotation of the features.
    #[arg(long)]
    pub no_pca: bool,
    #[arg(long, value_enum, default_value_t = PcaStageArg::AfterDynamics)]
    pub pca_stage: PcaStageArg,
    /// Variance floor as a fraction of the pooled feature variance.
    #[arg(long, default_value_t = HmmConfig::default().variance_floor_factor)]
    pub variance_floor: f64,
    /// Lower bound on every trained transition probability.
    #[arg(long, default_value_t = HmmConfig::default().min_self_loop)]
    pub min_transition: f64,
}

pub const TRAIN_FLAGS: [&str; 7] =
    ["states", "iterations", "topology", "no_pca", "pca_stage", "variance_floor", "min_transition"];

#[derive(Debug, Args)]
pub struct EnrollArgs {
    /// Manifest CSV.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Model directory to write.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Manifest CSV.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Trained model directory. Without it, models are trained from the
    /// manifest's enrollment rows using the training flags.
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Directory for report.json and table.txt.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = GrammarArg::Multi)]
    pub grammar: GrammarArg,
    /// Row label in the accuracy table (defaults to a description of the setup).
    #[arg(long)]
    pub label: Option<String>,
    /// Earlier report.json; prints one-tailed p-values that this run beats it.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    /// Trained model directory.
    #[arg(long)]
    pub models: PathBuf,
    /// Recording to identify.
    #[arg(long)]
    pub wav: PathBuf,
    #[arg(long, value_enum, default_value_t = GrammarArg::Multi)]
    pub grammar: GrammarArg,
    /// Ranked subjects to print.
    #[arg(long, default_value_t = 5)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    /// Recording to analyse.
    #[arg(long)]
    pub wav: PathBuf,
    /// Model directory whose feature settings and PCA rotation to apply.
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Leave the features unrotated even when the models carry a PCA.
    #[arg(long)]
    pub no_pca: bool,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
