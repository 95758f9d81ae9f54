use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use voronoi_bubbles::geometry::SpaceKind;

/// Spherical Voronoi partitions: construction, flatness certificates,
/// potentials, identity checks, stability margins, volumes and figures.
///
/// Exit codes: 0 all checks pass, 1 error, 2 checked and failed or
/// infeasible. Errors are printed to stderr as one JSON record.
#[derive(Debug, Parser)]
#[command(name = "bubbles", version)]
pub struct Cli {
    /// Seed of the ChaCha8 stream used for all sampling; echoed in every
    /// report.
    #[arg(long, global = true, default_value_t = crate::DEFAULT_SEED)]
    pub seed: u64,
    /// Report file; stdout when absent.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a standard partition (or a flat Gaussian one) as JSON.
    Construct(ConstructArgs),
    /// Solve the flatness system of a partition.
    Flatness(InputArgs),
    /// Build the conformally flattening boundary potential.
    Potential(InputArgs),
    /// Run the pointwise identity checks.
    Verify(VerifyArgs),
    /// Stability margins of a planar partition complex.
    Stability(StabilityArgs),
    /// Monte Carlo cell volumes.
    Volumes(VolumesArgs),
    /// SVG and CSV of the interfaces of a planar partition or a slice.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpaceArg {
    #[value(name = "S")]
    S,
    #[value(name = "R")]
    R,
    #[value(name = "H")]
    H,
    #[value(name = "G")]
    G,
}

impl From<SpaceArg> for SpaceKind {
    fn from(s: SpaceArg) -> Self {
        match s {
            SpaceArg::S => SpaceKind::SphereS,
            SpaceArg::R => SpaceKind::EuclidR,
            SpaceArg::H => SpaceKind::HyperH,
            SpaceArg::G => SpaceKind::GaussG,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Equidistant Voronoi partition (a simplex cone on the Gaussian space).
    Standard,
    /// Gaussian plane: Voronoi cells of the q lattice points of the
    /// triangular lattice nearest to the origin.
    Hex,
    /// Gaussian plane: two parallel lines at distance `gap` from the origin.
    Lines,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long, value_enum)]
    pub space: SpaceArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub q: usize,
    #[arg(long, value_enum, default_value = "standard")]
    pub family: Family,
    /// Möbius map applied on the sphere before the pull-back.
    #[arg(long)]
    pub mobius: Option<PathBuf>,
    /// Apply a random Möbius map with this many moves (seeded).
    #[arg(long)]
    pub random_moves: Option<usize>,
    #[arg(long, default_value_t = 0.7)]
    pub gap: f64,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Partition JSON.
    pub partition: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub partition: PathBuf,
    /// Potential JSON; built from the flatness certificate when absent.
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// Samples per interface or triple junction.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = voronoi_bubbles::verification::ALGEBRAIC_TOL)]
    pub algebraic_tol: f64,
    #[arg(long, default_value_t = voronoi_bubbles::verification::FD_TOL)]
    pub fd_tol: f64,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    pub partition: PathBuf,
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// Vertices per interface.
    #[arg(long, default_value_t = 200)]
    pub resolution: usize,
    /// Truncation radius of unbounded interfaces.
    #[arg(long, default_value_t = voronoi_bubbles::discrete::DEFAULT_RADIUS)]
    pub radius: f64,
    /// Allowed negative margin.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Random admissible fields for the volume check.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct VolumesArgs {
    pub partition: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = voronoi_bubbles::partitions::DEFAULT_TRUNCATION)]
    pub truncation: f64,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub partition: PathBuf,
    #[arg(long)]
    pub svg: PathBuf,
    #[arg(long)]
    pub csv: PathBuf,
    /// Cutting plane `a,b,c,d` = {a x + b y + c z = d} for n = 3.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub plane: Option<Vec<f64>>,
    /// Half width of the drawn square; defaults per space.
    #[arg(long)]
    pub extent: Option<f64>,
    /// Samples per interface circle.
    #[arg(long, default_value_t = 2048)]
    pub samples: usize,
}
