mod commands;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use camsight::Error;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "camsight", version, about = "Reconstruct and analyze networks of mutually sighting cameras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Random,
    Polygon,
    Platonic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Batch,
    Sequential,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a scene file.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Number of cameras (random and polygon scenes).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 2)]
        dim: u8,
        /// FOV in radians (2D) or steradians (3D); defaults to the full
        /// circle/sphere for random scenes and the extremal value otherwise.
        #[arg(long)]
        fov: Option<f64>,
        /// Platonic solid name.
        #[arg(long)]
        solid: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize the sightings of a scene.
    Sight {
        #[arg(long)]
        scene: PathBuf,
        /// Angular noise standard deviation in radians.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct poses from a sighting file.
    Solve {
        #[arg(long)]
        sightings: PathBuf,
        #[arg(long)]
        dim: Option<u8>,
        #[arg(long, value_enum, default_value_t = Mode::Batch)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report the FOV each camera of a scene needs to see all others.
    Analyze {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sighting probabilities for random orientations, with Monte Carlo checks.
    Prob {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: u8,
        /// FOV; defaults to the minimal FOV whose expected sighting count
        /// suffices for reconstruction.
        #[arg(long)]
        fov: Option<f64>,
        /// Threshold for the reverse Markov bound on P[Y <= a].
        #[arg(long)]
        a: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Visible area (2D) or volume (3D) of a disk/ball seen from inside.
    Region {
        #[arg(long, default_value_t = 2)]
        dim: u8,
        /// Half-angle of the FOV in radians.
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a scene or reconstruction as SVG, or tabulate any document as CSV.
    Plot {
        #[arg(long)]
        input: PathBuf,
        /// Sightings drawn as arrows.
        #[arg(long)]
        sightings: Option<PathBuf>,
        /// Wedge FOV for documents without one (reconstructions).
        #[arg(long)]
        fov: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// A failure with its exit code and a machine-readable record.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
    pub details: Value,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: 2, kind: "InvalidInput", message: message.into(), details: Value::Null }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (code, kind, details) = match &e {
            Error::NotConnected { components } => (
                3,
                "NotConnected",
                json!({ "components": components.iter().map(|c| c.iter().map(|i| i.0).collect::<Vec<_>>()).collect::<Vec<_>>() }),
            ),
            Error::InsufficientSightings { have, need, .. } => {
                (3, "InsufficientSightings", json!({ "have": have, "need": need }))
            }
            Error::InconsistentCycle { a, b, defect } => {
                (3, "InconsistentCycle", json!({ "cameras": [a.0, b.0], "defect": defect }))
            }
            e if e.is_underdetermined() => (3, "Underdetermined", Value::Null),
            Error::NoConvergence { .. }
            | Error::DegenerateTriangle(_)
            | Error::DegenerateConfiguration(_)
            | Error::DegenerateLink
            | Error::DegenerateFace { .. }
            | Error::InconsistentFaces { .. }
            | Error::NoRealRoot
            | Error::NoRealSolution
            | Error::CollinearLandmarks
            | Error::DegenerateDenominator
            | Error::AntipodalPair => (3, "SolverFailure", Value::Null),
            _ => (2, "InvalidInput", Value::Null),
        };
        CliError { code, kind, message, details }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

/// Writes `content` to `out` (or standard output) together with a manifest
/// describing how to regenerate it.
pub fn emit(out: Option<&Path>, content: &str, command: &str, inputs: Value, seed: Option<u64>) -> CliResult<()> {
    let Some(path) = out else {
        print!("{content}");
        return Ok(());
    };
    let write = |p: &Path, s: &str| {
        std::fs::write(p, s).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display())))
    };
    write(path, content)?;
    let manifest = json!({
        "kind": "manifest",
        "command": command,
        "inputs": inputs,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "outputs": [path.display().to_string()],
    });
    let mut m = path.as_os_str().to_owned();
    m.push(".manifest.json");
    write(Path::new(&m), &(serde_json::to_string_pretty(&manifest).unwrap() + "\n"))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate { kind, n, dim, fov, solid, seed, out } => {
            commands::generate(kind, n, dim, fov, solid.as_deref(), seed, out.as_deref())
        }
        Command::Sight { scene, noise, seed, out } => commands::sight(&scene, noise, seed, out.as_deref()),
        Command::Solve { sightings, dim, mode, out } => commands::solve(&sightings, dim, mode, out.as_deref()),
        Command::Analyze { scene, out } => commands::analyze(&scene, out.as_deref()),
        Command::Prob { n, dim, fov, a, samples, seed, out } => {
            commands::prob(n, dim, fov, a, samples, seed, out.as_deref())
        }
        Command::Region { dim, delta, radius, samples, seed, out } => {
            commands::region(dim, delta, radius, samples, seed, out.as_deref())
        }
        Command::Plot { input, sightings, fov, out } => plot::plot(&input, sightings.as_deref(), fov, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = json!({ "error": e.kind, "message": e.message, "exit": e.code, "details": e.details });
            eprintln!("{record}");
            ExitCode::from(e.code)
        }
    }
}
