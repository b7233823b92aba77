use std::hash::{BuildHasher, Hasher};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fidelity_bounds::{BoundId, Ensemble, Tolerances};
use serde::{Deserialize, Serialize};

/// Seed used when neither `--seed` nor `--random-seed` is given.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Parser)]
#[command(
    name = "fidbounds",
    version,
    about = "Fidelity, trace and Bures distances, and checks of fidelity lower bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Metrics, bound reports and decomposition for two state files.
    Compute(ComputeArgs),
    /// Monte-Carlo verification of bounds over random state pairs.
    Verify(VerifyArgs),
    /// Optimization-based counterexample search for an unproven bound.
    Search(SearchArgs),
    /// Gap as a function of the overlap of two pure states.
    Landscape(LandscapeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

fn parse_bound(s: &str) -> Result<BoundId, String> {
    s.parse().map_err(|e: fidelity_bounds::Error| e.to_string())
}

fn parse_ensemble(s: &str) -> Result<Ensemble, String> {
    s.parse().map_err(|e: fidelity_bounds::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Master seed for all sampling.
    #[arg(long, default_value_t = DEFAULT_SEED, conflicts_with = "random_seed")]
    pub seed: u64,
    /// Draw a fresh master seed; it is recorded in the report.
    #[arg(long)]
    pub random_seed: bool,
    /// Tolerance for the proved mixed-state path bound.
    #[arg(long)]
    pub tol_proved: Option<f64>,
    /// Tolerance for the closed-form pure-state bound.
    #[arg(long)]
    pub tol_scalar: Option<f64>,
    /// Tolerance for both Fuchs-van de Graaf inequalities.
    #[arg(long)]
    pub tol_fvdg: Option<f64>,
    /// Gap below minus this flags an unproven bound as a candidate counterexample.
    #[arg(long)]
    pub tol_candidate: Option<f64>,
    /// Report destination (standard output when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Directory for candidate counterexample state files
    /// (defaults to the report's directory, or the working directory).
    #[arg(long)]
    pub candidate_dir: Option<PathBuf>,
}

impl CommonArgs {
    pub fn tolerances(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            proved: self.tol_proved.unwrap_or(d.proved),
            scalar: self.tol_scalar.unwrap_or(d.scalar),
            fvdg: self.tol_fvdg.unwrap_or(d.fvdg),
            candidate: self.tol_candidate.unwrap_or(d.candidate),
        }
    }

    pub fn resolved_seed(&self) -> u64 {
        if self.random_seed {
            let mut h = std::collections::hash_map::RandomState::new().build_hasher();
            h.write_u128(
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map_or(0, |d| d.as_nanos()),
            );
            h.finish()
        } else {
            self.seed
        }
    }

    pub fn candidate_dir(&self) -> PathBuf {
        if let Some(dir) = &self.candidate_dir {
            return dir.clone();
        }
        self.out
            .as_ref()
            .and_then(|p| p.parent())
            .filter(|p| !p.as_os_str().is_empty())
            .map_or_else(|| PathBuf::from("."), PathBuf::from)
    }
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    /// State file for rho.
    pub rho: PathBuf,
    /// State file for sigma.
    pub sigma: PathBuf,
    /// Mixing weights for the path bounds (comma separated; default grid when omitted).
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Bounds to check (comma separated; defaults to the proved bounds).
    #[arg(long, value_delimiter = ',', value_parser = parse_bound)]
    pub bound: Option<Vec<BoundId>>,
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4])]
    pub dim: Vec<usize>,
    /// Pairs per dimension.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,
    /// haar_pure, ginibre_full_rank, ginibre_rank_k:K or pure_pair_with_overlap:R
    /// (defaults to haar_pure for thm1_pure_path and ginibre_full_rank otherwise).
    #[arg(long, value_parser = parse_ensemble)]
    pub ensemble: Option<Ensemble>,
    /// Emit every sample instead of only violations and per-bound minima.
    #[arg(long)]
    pub all_samples: bool,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// conjecture_path or smax_lower.
    #[arg(long, value_parser = parse_bound, default_value = "conjecture_path")]
    pub bound: BoundId,
    /// Dimensions to search (comma separated, one search each).
    #[arg(long, value_delimiter = ',', default_values_t = [2usize])]
    pub dim: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    /// Starting weights scanned at each restart.
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    #[arg(long, value_parser = parse_bound, default_value = "thm1_pure_path")]
    pub bound: BoundId,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Mixing weight for path bounds.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Number of evenly spaced overlaps in [0, 1].
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}
