//! The `sparse-qap` command line: argument parsing, configuration merging,
//! thread setup and error reporting. Failures print one line,
//! `error: <class>: <message>`, and exit with the error's code.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
pub use config::{InputKind, RunConfig};

macro_rules! config_args {
    ($($field:ident),* $(,)?) => {
        /// Per-key overrides of the run configuration.
        #[derive(Args, Debug, Clone, Default)]
        pub struct ConfigArgs {
            /// Flat `key = value` configuration file.
            #[arg(long, value_name = "FILE")]
            pub config: Option<PathBuf>,
            $(
                #[arg(long, value_name = "VALUE", hide_short_help = true)]
                pub $field: Option<String>,
            )*
        }

        impl ConfigArgs {
            fn overrides(&self) -> Vec<(&'static str, &str)> {
                let mut v = Vec::new();
                $(
                    if let Some(x) = &self.$field {
                        v.push((stringify!($field), x.as_str()));
                    }
                )*
                v
            }
        }
    };
}

config_args!(
    outer_iters,
    epsilon_start,
    epsilon_end,
    epsilon_schedule,
    distortion_ring,
    sparsity_ring,
    mu,
    step0,
    inner_iters,
    tol,
    postprocess,
    init,
    init_map,
    seed,
    shot_radius_factor,
    hks_eigs,
    hks_time,
    signature_anchors,
    knn_k0,
    knn_ratio,
    knn_shrink,
    knn_min,
    kind,
    threads,
    timing,
);

impl ConfigArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for (k, v) in self.overrides() {
            cfg.set(k, v)?;
        }
        cfg.finish()
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "sparse-qap",
    version,
    about = "Dense shape correspondence by sparse relaxed quadratic assignment"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Match a source shape to a target shape.
    Match(MatchArgs),
    /// Score maps against a ground truth.
    Eval(EvalArgs),
    /// Derive a synthetic target and its ground truth from a shape.
    Synth(SynthArgs),
    /// Export operators or per-vertex descriptors.
    Descriptors(DescriptorArgs),
    /// Render CSV columns as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
pub struct MatchArgs {
    #[arg(required_unless_present = "print_config")]
    pub source: Option<PathBuf>,
    #[arg(required_unless_present = "print_config")]
    pub target: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
    /// Print the effective configuration and exit.
    #[arg(long)]
    pub print_config: bool,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Map CSV; repeat to compare several maps.
    #[arg(long = "map", required = true, value_name = "CSV")]
    pub maps: Vec<PathBuf>,
    /// Ground-truth CSV.
    #[arg(long)]
    pub gt: PathBuf,
    /// Target shape, for geodesic distances.
    #[arg(long)]
    pub target: PathBuf,
    /// Source shape; adds local distortion of every map.
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// Series names, in map order. Defaults to the map file stems.
    #[arg(long = "label")]
    pub labels: Vec<String>,
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    pub input: PathBuf,
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
    /// Rotation as `axis_x,axis_y,axis_z,degrees`.
    #[arg(long, value_name = "AX,AY,AZ,DEG", allow_hyphen_values = true)]
    pub rotate: Option<String>,
    /// Translation as `x,y,z`.
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    pub translate: Option<String>,
    /// Relabel vertices with a permutation drawn from this seed.
    #[arg(long, value_name = "SEED")]
    pub permute: Option<u64>,
    /// Delete this percentage of faces.
    #[arg(long, value_name = "PERCENT", conflicts_with_all = ["crop_ball", "noise"])]
    pub delete_faces: Option<f64>,
    /// Keep a geodesic ball: `center=<vertex> radius=<fraction of diameter>`.
    #[arg(long, num_args = 1..=2, value_name = "KEY=VALUE", conflicts_with = "noise")]
    pub crop_ball: Option<Vec<String>>,
    /// Vertex noise, as a fraction of the mean edge length.
    #[arg(long, value_name = "SIGMA")]
    pub noise: Option<f64>,
    /// Seed for deletion and noise.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// auto, mesh or cloud.
    #[arg(long, default_value = "auto")]
    pub kind: String,
}

#[derive(Args, Debug)]
pub struct DescriptorArgs {
    pub input: PathBuf,
    /// stiffness, mass, shot, hks or geodesic_sig.
    #[arg(long)]
    pub which: String,
    /// Anchor vertices for geodesic_sig, comma separated. Defaults to
    /// `signature_anchors` farthest-point samples.
    #[arg(long, value_name = "I,J,...")]
    pub anchors: Option<String>,
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output SVG file.
    #[arg(long, short, default_value = "plot.svg")]
    pub out: PathBuf,
    /// X column; defaults to the first column.
    #[arg(long)]
    pub x: Option<String>,
    /// Y columns; default to every other column.
    #[arg(long)]
    pub y: Vec<String>,
    #[arg(long)]
    pub log_y: bool,
    #[arg(long)]
    pub title: Option<String>,
}

/// Builds the worker pool and runs `f` inside it.
pub(crate) fn with_threads<T: Send>(
    threads: usize,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} threads: {e}")))?;
    pool.install(f)
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Match(a) => commands::run_match(a),
        Command::Eval(a) => commands::run_eval(a),
        Command::Synth(a) => commands::run_synth(a),
        Command::Descriptors(a) => commands::run_descriptors(a),
        Command::Plot(a) => commands::run_plot(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors go to stderr as one line.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                let _ = e.print();
                return 0;
            }
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("error: config.invalid: {first}");
            return Error::Config(String::new()).exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}: {}", e.class(), e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}
