use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "extrinsic", version, about = "Extrinsic comparison geometry of minimal surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON configuration file; flags and environment take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; runs are written to `<outdir>/<run-name>/`.
    #[arg(long, global = true, env = "EXTRINSIC_OUTDIR")]
    pub outdir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub run_name: Option<String>,
    /// Worker threads (default: machine parallelism).
    #[arg(long, global = true, env = "EXTRINSIC_THREADS")]
    pub threads: Option<usize>,
    /// Exit with status 1 when any check is inconclusive as well as failed.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Model-space quantities.
    Model(ModelCmd),
    /// Build or load a mesh and report its statistics.
    Surface(SurfaceCmd),
    /// Volume and flux quotient curves.
    Quotients(QuotientsCmd),
    /// Capacity of an extrinsic annulus against the model.
    Capacity(CapacityCmd),
    /// Mean exit time of an extrinsic ball against the model.
    ExitTime(ExitTimeCmd),
    /// Number of ends and its upper bounds.
    Ends(EndsCmd),
    /// Fundamental tone bounds.
    Tone(ToneCmd),
    /// Full verification suite.
    Verify(VerifyCmd),
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    /// `dim=<m>,warp=<expr>`.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Warping function in `r`, or `b=<curvature>` for a space form.
    #[arg(long)]
    pub warp: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct SurfaceArgs {
    /// Builtin surface: plane, catenoid, helicoid or enneper.
    #[arg(long)]
    pub surface: Option<String>,
    /// OFF or OBJ mesh file.
    #[arg(long, conflicts_with = "surface")]
    pub mesh: Option<PathBuf>,
    /// Pole as `x,y,z`.
    #[arg(long, allow_hyphen_values = true)]
    pub pole: Option<String>,
    /// Surface parameter `key=value`; repeatable.
    #[arg(long = "param")]
    pub params: Vec<String>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub half: Option<f64>,
    #[arg(long)]
    pub umax: Option<f64>,
    #[arg(long)]
    pub vmax: Option<f64>,
    /// Grid resolution in both parameter directions.
    #[arg(long)]
    pub res: Option<usize>,
    #[arg(long)]
    pub nu: Option<usize>,
    #[arg(long)]
    pub nv: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct TolArgs {
    #[arg(long)]
    pub tol_iso: Option<f64>,
    #[arg(long)]
    pub mono_slack: Option<f64>,
    #[arg(long)]
    pub tol_capacity: Option<f64>,
    #[arg(long)]
    pub tol_exit: Option<f64>,
    #[arg(long)]
    pub tol_tail: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ModelCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Radius grid `a:b:n` for curves.
    #[arg(long)]
    pub grid: Option<String>,
    /// Capacity of the annulus `rho:R`.
    #[arg(long)]
    pub capacity: Option<String>,
    #[arg(long)]
    pub vol_ball: Option<f64>,
    #[arg(long)]
    pub vol_sphere: Option<f64>,
    /// Mean exit time `E^w_R(0)` of the ball of radius R.
    #[arg(long)]
    pub exit: Option<f64>,
    #[arg(long)]
    pub balance: bool,
    #[arg(long)]
    pub parabolicity: bool,
    /// Tone upper limit and Cheeger lower bound.
    #[arg(long)]
    pub tone: bool,
    #[arg(long)]
    pub ends_coefficient: bool,
    /// Largest radial and tangential model curvatures on the grid.
    #[arg(long)]
    pub curvature: bool,
}

#[derive(Debug, Args)]
pub struct SurfaceCmd {
    #[command(flatten)]
    pub surface: SurfaceArgs,
}

#[derive(Debug, Args)]
pub struct QuotientsCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct CapacityCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long = "R")]
    pub big_r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ExitTimeCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long = "R")]
    pub big_r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EndsCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[arg(long = "R")]
    pub big_r: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ToneCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Radius outside which ends are taken.
    #[arg(long)]
    pub r0: Option<f64>,
    /// Radii of the discrete eigenvalue trend.
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long = "R")]
    pub big_r: Option<f64>,
    /// Ends are counted outside this radius.
    #[arg(long)]
    pub ends_r: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub tone_grid: Option<String>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Model(_) => "model",
            Command::Surface(_) => "surface",
            Command::Quotients(_) => "quotients",
            Command::Capacity(_) => "capacity",
            Command::ExitTime(_) => "exit-time",
            Command::Ends(_) => "ends",
            Command::Tone(_) => "tone",
            Command::Verify(_) => "verify",
        }
    }
}

impl SurfaceArgs {
    pub fn given(&self) -> bool {
        self.surface.is_some() || self.mesh.is_some()
    }
}
