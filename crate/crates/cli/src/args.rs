use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "fba", version, about = "Alpha matting toolkit: compositing, losses, fusion, trimaps, metrics")]
pub struct Cli {
    /// Maximum worker threads.
    #[arg(long, global = true, env = "FBA_THREADS")]
    pub threads: Option<usize>,

    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Composite a foreground over a background with an alpha matte.
    Composite(CompositeArgs),
    /// Estimate full-frame foreground and background colors.
    ExtendFg(ExtendFgArgs),
    /// Generate a trimap from a ground-truth matte.
    MakeTrimap(MakeTrimapArgs),
    /// Encode a trimap as six blurred mask channels.
    EncodeTrimap(EncodeTrimapArgs),
    /// Fuse predicted alpha, foreground and background with the image.
    Fuse(FuseArgs),
    /// Evaluate the training losses of a prediction.
    Loss(LossArgs),
    /// Score a predicted matte.
    Evaluate(EvaluateArgs),
    /// Score the premultiplied foreground of a prediction.
    EvaluateFg(EvaluateFgArgs),
    /// Compose one augmented training sample.
    MakeSample(MakeSampleArgs),
    /// Write transformed copies of an image and trimap for test-time augmentation.
    TtaForward(TtaForwardArgs),
    /// Map per-transform predictions back and average them.
    TtaMerge(TtaMergeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Depth {
    #[value(name = "8")]
    Eight,
    #[value(name = "16")]
    Sixteen,
}

#[derive(Debug, Args)]
pub struct CompositeArgs {
    #[arg(long)]
    pub alpha: PathBuf,
    #[arg(long)]
    pub fg: PathBuf,
    #[arg(long)]
    pub bg: PathBuf,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
    /// Bit depth when writing PNG.
    #[arg(long, value_enum, default_value = "8")]
    pub depth: Depth,
}

#[derive(Debug, Args)]
pub struct ExtendFgArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub alpha: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub smoothness: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, default_value_t = 0.003)]
    pub edge_floor: f64,
    /// Initialize from a half-resolution solve.
    #[arg(long)]
    pub multires: bool,
    #[arg(long)]
    pub fg_out: PathBuf,
    #[arg(long)]
    pub bg_out: PathBuf,
    /// Print solver statistics as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BorderArg {
    Outside,
    Inside,
}

#[derive(Debug, Args)]
pub struct MakeTrimapArgs {
    #[arg(long)]
    pub alpha: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub min_px: u32,
    #[arg(long, default_value_t = 25)]
    pub max_px: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "outside")]
    pub border: BorderArg,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
    /// Print the drawn radii as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EncodeTrimapArgs {
    #[arg(long)]
    pub trimap: PathBuf,
    #[arg(long, value_delimiter = ',', num_args = 3, default_value = "2,8,16")]
    pub sigmas: Vec<f64>,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub alpha: PathBuf,
    #[arg(long)]
    pub fg: PathBuf,
    #[arg(long)]
    pub bg: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub iters: usize,
    #[arg(long, default_value_t = 10.0)]
    pub sigma_alpha_sq: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_fb_sq: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_c_sq: f64,
    /// Skip clamping to [0, 1] after each sweep.
    #[arg(long)]
    pub no_clamp: bool,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaskArg {
    Full,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GradientArg {
    Forward,
    Sobel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReductionArg {
    Sum,
    Mean,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    #[arg(long)]
    pub pred_dir: PathBuf,
    #[arg(long)]
    pub gt_dir: PathBuf,
    #[arg(long)]
    pub image: PathBuf,
    /// Region for the alpha terms.
    #[arg(long, value_enum, default_value = "full")]
    pub mask: MaskArg,
    /// Region for the foreground/background terms; defaults to `--mask`.
    #[arg(long, value_enum)]
    pub mask_fb: Option<MaskArg>,
    /// Required when a mask is `unknown`.
    #[arg(long)]
    pub trimap: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "forward")]
    pub gradient: GradientArg,
    #[arg(long, value_enum, default_value = "sum")]
    pub reduction: ReductionArg,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum MetricArg {
    Sad,
    Mse,
    Grad,
    Conn,
}

#[derive(Debug, Args)]
pub struct MetricParamArgs {
    #[arg(long, default_value_t = 1.4)]
    pub sigma: f64,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    #[arg(long, default_value_t = 0.15)]
    pub theta: f64,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub trimap: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "sad,mse,grad,conn")]
    pub metrics: Vec<MetricArg>,
    #[arg(long, value_enum, default_value = "unknown")]
    pub region: MaskArg,
    #[command(flatten)]
    pub params: MetricParamArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateFgArgs {
    #[arg(long)]
    pub pred_dir: PathBuf,
    #[arg(long)]
    pub gt_dir: PathBuf,
    #[arg(long)]
    pub trimap: PathBuf,
    /// Alpha metrics reported alongside the foreground scores.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "sad,mse")]
    pub metrics: Vec<MetricArg>,
    #[arg(long, value_enum, default_value = "unknown")]
    pub region: MaskArg,
    #[command(flatten)]
    pub params: MetricParamArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct MakeSampleArgs {
    #[arg(long)]
    pub fg: PathBuf,
    #[arg(long)]
    pub alpha: PathBuf,
    #[arg(long)]
    pub bg: PathBuf,
    /// Optional second foreground for the merge augmentation.
    #[arg(long, requires = "alpha2")]
    pub fg2: Option<PathBuf>,
    #[arg(long, requires = "fg2")]
    pub alpha2: Option<PathBuf>,
    /// JSON sample specification.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TtaForwardArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub trimap: PathBuf,
    /// Comma-separated transform names such as `rot90-flip@0.5`; `dihedral`
    /// expands to the eight unit-scale transforms and `dihedral-multiscale`
    /// to all eight at scales 0.5, 1 and 2.
    #[arg(long, default_value = "dihedral")]
    pub transforms: String,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TtaMergeArgs {
    /// Directory holding one prediction subdirectory per transform.
    #[arg(long)]
    pub inputs: PathBuf,
    #[arg(long, default_value = "dihedral")]
    pub transforms: String,
    /// Original image size `WxH`; inferred from the unit-scale prediction when omitted.
    #[arg(long)]
    pub size: Option<String>,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}
