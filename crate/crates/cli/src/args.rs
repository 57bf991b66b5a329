use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hgasket", version, about = "Harmonic Sierpinski gaskets, their metric, geodesics and heat kernel")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Number of vertices of the simplex.
    #[arg(long = "n", global = true, default_value_t = 3)]
    pub n: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the output here and a manifest next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true)]
    pub depth: Option<usize>,

    #[arg(long, global = true)]
    pub level: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoordinateChoice {
    Euclidean,
    Harmonic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vertices of V_m (default level 1).
    Vertices(VerticesArgs),
    /// The curve Γ in plane coordinates (default depth 10).
    Curve(CurveArgs),
    /// Kusuoka masses: one cylinder with --word, level totals otherwise (default level 3).
    Measure(MeasureArgs),
    /// Z_m(w) with --word, otherwise operator identities or the tangent check.
    Metric(MetricArgs),
    /// Shortest path in the level graph (default level 2, depth level + 10).
    Geodesic(GeodesicArgs),
    /// Hölder exponent of g': closed forms and the regression estimate.
    Holder(HolderArgs),
    /// Containment of the projected attractor in Υ (default depth 10).
    UpsilonCheck(UpsilonArgs),
    /// Energy invariance, monotonicity, conjugacy and the energy/metric identity (default level 8).
    EnergyCheck(EnergyArgs),
    /// Heat kernel properties (default level 3).
    Heat(HeatArgs),
    /// Gaussian diagnostic fit of the heat kernel (default level 5, depth level + 9).
    GaussianReport(GaussianArgs),
}

#[derive(Debug, Clone, Args)]
pub struct VerticesArgs {
    #[arg(long, value_enum, default_value_t = CoordinateChoice::Harmonic)]
    pub coords: CoordinateChoice,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    /// Report every N from --n to this value; implies --summary.
    #[arg(long)]
    pub up_to: Option<usize>,

    /// Omit the point list from JSON output.
    #[arg(long)]
    pub summary: bool,

    /// Smallest depth of the length table.
    #[arg(long, default_value_t = 8)]
    pub min_length_depth: usize,
}

#[derive(Debug, Clone, Args)]
pub struct MeasureArgs {
    #[arg(long)]
    pub word: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    #[arg(long)]
    pub word: Option<String>,

    /// Operator identities for every N from --n to this value.
    #[arg(long)]
    pub up_to: Option<usize>,

    /// Compare Z_m with tangent projections instead.
    #[arg(long)]
    pub tangent: bool,

    #[arg(long, default_value_t = 200)]
    pub samples: usize,

    #[arg(long, default_value_t = 12)]
    pub word_length: usize,

    #[arg(long, default_value_t = 20)]
    pub tangent_depth: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GeodesicArgs {
    /// Start vertex `w:j` meaning S_w(p_j); `1` is p_1.
    #[arg(long, default_value = "1")]
    pub from: String,

    #[arg(long, default_value = "2")]
    pub to: String,

    #[arg(long, default_value_t = 14)]
    pub junction_depth: usize,

    /// Also integrate the length against Z with this many panels per arc.
    #[arg(long)]
    pub panels: Option<usize>,

    #[arg(long, default_value_t = 24)]
    pub z_depth: usize,

    /// Metric axioms on all vertex pairs of the level.
    #[arg(long)]
    pub axioms: bool,

    /// Check d^(m) nonincreasing for m from --refine-from to this level.
    #[arg(long)]
    pub refine_to: Option<usize>,

    #[arg(long, default_value_t = 1)]
    pub refine_from: usize,
}

#[derive(Debug, Clone, Args)]
pub struct HolderArgs {
    #[arg(long)]
    pub up_to: Option<usize>,

    /// Skip the regression and report only the closed forms.
    #[arg(long)]
    pub no_estimate: bool,

    #[arg(long, default_value_t = 64)]
    pub base_points: usize,

    #[arg(long, default_value_t = 6)]
    pub min_exponent: u32,

    #[arg(long, default_value_t = 12)]
    pub max_exponent: u32,
}

#[derive(Debug, Clone, Args)]
pub struct UpsilonArgs {
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,

    #[arg(long, default_value_t = 500)]
    pub star_samples: usize,

    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,

    /// Polyline depth of the boundary curve.
    #[arg(long, default_value_t = 12)]
    pub curve_depth: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EnergyArgs {
    #[arg(long, default_value_t = 100)]
    pub samples: usize,

    #[arg(long, default_value_t = 6)]
    pub conjugacy_level: usize,

    #[arg(long, default_value_t = 7)]
    pub identity_level: usize,
}

#[derive(Debug, Clone, Args)]
pub struct HeatArgs {
    #[arg(long, default_value_t = 0.01)]
    pub s: f64,

    #[arg(long, default_value_t = 0.03)]
    pub t: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GaussianArgs {
    /// Times run over 2^-e for e from --min-exponent to --max-exponent.
    #[arg(long, default_value_t = 2)]
    pub min_exponent: i32,

    #[arg(long, default_value_t = 12)]
    pub max_exponent: i32,
}
