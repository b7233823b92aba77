use std::fmt;
use std::path::{Path, PathBuf};

use fidelity_bounds::bounds::{self, BoundReport, PathPair};
use fidelity_bounds::io::{read_state, write_state, StateDocument, StateFile};
use fidelity_bounds::metrics;
use fidelity_bounds::search::{
    self, default_lambda_grid, unit_grid, BatchConfig, LandscapeConfig, SearchConfig,
};
use fidelity_bounds::states::{sample_pair, SampleSpec};
use fidelity_bounds::{BoundId, DensityMatrix64, Error};
use serde::Serialize;
use serde_json::json;

use crate::args::{CommonArgs, ComputeArgs, LandscapeArgs, SearchArgs, VerifyArgs};
use crate::report::{CommandKind, Record, Report, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Clean = 0,
    ConfigError = 1,
    ProvedViolation = 2,
    Candidate = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// A proved-bound violation outranks a candidate counterexample.
pub fn exit_status(proved_violation: bool, candidate: bool) -> ExitStatus {
    if proved_violation {
        ExitStatus::ProvedViolation
    } else if candidate {
        ExitStatus::Candidate
    } else {
        ExitStatus::Clean
    }
}

#[derive(Debug)]
pub enum CliError {
    Library(Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Library(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn base_config(command: CommandKind, common: &CommonArgs) -> CliResult<RunConfig> {
    let tolerances = common.tolerances();
    tolerances.validate()?;
    Ok(RunConfig {
        command,
        inputs: Vec::new(),
        bounds: Vec::new(),
        dims: Vec::new(),
        samples: None,
        lambda_grid: Vec::new(),
        ensemble: None,
        restarts: None,
        max_iters: None,
        lambda: None,
        points: None,
        seed: common.resolved_seed(),
        seed_randomized: common.random_seed,
        tolerances,
        workers: common.workers,
        output: common.out.clone(),
        format: common.format,
        inject_fault: false,
    })
}

fn check_lambdas(grid: &[f64]) -> CliResult<()> {
    match grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        Some(&l) => Err(Error::LambdaOutOfRange(l).into()),
        None if grid.is_empty() => Err(Error::InvalidSpec("lambda grid is empty".into()).into()),
        None => Ok(()),
    }
}

fn negate(mut r: BoundReport<f64>) -> BoundReport<f64> {
    r.gap = -r.gap;
    r.satisfied = r.gap >= -r.tolerance;
    r
}

#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    pub bound_id: BoundId,
    pub dim: usize,
    pub lambda: Option<f64>,
    pub gap: f64,
    pub rho: StateDocument,
    pub sigma: StateDocument,
    pub files: [PathBuf; 2],
}

fn save_candidate(
    dir: &Path,
    tag: &str,
    bound_id: BoundId,
    rho: StateDocument,
    sigma: StateDocument,
    lambda: Option<f64>,
    gap: f64,
) -> CliResult<Candidate> {
    std::fs::create_dir_all(dir)?;
    let files =
        ["rho", "sigma"].map(|which| dir.join(format!("candidate_{bound_id}_{tag}_{which}.json")));
    write_state(&files[0], &rho)?;
    write_state(&files[1], &sigma)?;
    Ok(Candidate {
        bound_id,
        dim: rho.dim,
        lambda,
        gap,
        rho,
        sigma,
        files,
    })
}

fn load(path: &Path) -> CliResult<(DensityMatrix64, bool)> {
    let state = read_state::<f64>(path)?;
    let pure = match &state {
        StateFile::Pure(_) => true,
        StateFile::Mixed(rho) => bounds::is_pure(rho)?,
    };
    Ok((state.density(), pure))
}

pub fn compute(args: &ComputeArgs) -> CliResult<(Report, ExitStatus)> {
    let mut config = base_config(CommandKind::Compute, &args.common)?;
    let grid = args.lambda_grid.clone().unwrap_or_else(default_lambda_grid);
    check_lambdas(&grid)?;
    let (rho, rho_pure) = load(&args.rho)?;
    let (sigma, sigma_pure) = load(&args.sigma)?;
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        }
        .into());
    }
    let dim = rho.dim();
    let tol = config.tolerances;
    let both_pure = rho_pure && sigma_pure;

    let pair = PathPair::new(&rho, &sigma)?;
    let smax = metrics::smax(&rho, &sigma)?;
    let (lower, upper) = pair.fvdg(&tol);
    let mut reports = vec![lower, upper, pair.smax_bound(&tol)?];
    for &lambda in &grid {
        reports.extend(pair.check_both(lambda, &tol)?);
        if both_pure {
            reports.push(bounds::thm1_bound(pair.fidelity().min(1.0), lambda, &tol)?);
        }
    }
    if args.inject_fault {
        reports = reports.into_iter().map(negate).collect();
    }

    let decomposition = match bounds::decompose_with_smax(&rho, &sigma, &smax) {
        Ok(d) => json!({
            "lambda0": d.lambda0,
            "sigma_hat": StateDocument::from_density(&d.sigma_hat),
            "residual": d.residual,
            "min_eigenvalue": d.min_eigenvalue,
            "trace_identity_error": d.trace_identity_error,
        }),
        Err(e) => json!({ "unavailable": e.to_string() }),
    };
    let status = exit_status(
        reports.iter().any(BoundReport::is_proved_violation),
        reports.iter().any(BoundReport::is_candidate_counterexample),
    );

    config.inputs = vec![args.rho.clone(), args.sigma.clone()];
    config.bounds = BoundId::ALL
        .into_iter()
        .filter(|b| both_pure || *b != BoundId::Thm1PurePath)
        .collect();
    config.dims = vec![dim];
    config.lambda_grid = grid;
    config.inject_fault = args.inject_fault;
    let details = json!({
        "metrics": {
            "fidelity": pair.fidelity(),
            "trace_distance": pair.trace_norm() / 2.0,
            "bures_distance": pair.bures(),
            "lambda0": smax.lambda0,
            "lambda0_infinite": !smax.is_finite(),
            "smax": smax.smax,
            "support_violation": smax.support_violation,
            "infinity_conditions_disagree": smax.conditions_disagree(),
            "rho_pure": rho_pure,
            "sigma_pure": sigma_pure,
        },
        "decomposition": decomposition,
        "reports": reports,
    });
    let records = reports
        .iter()
        .map(|r| Record::from_report(r, dim))
        .collect();
    Ok((
        Report {
            config,
            exit_status: status.code(),
            records,
            details,
        },
        status,
    ))
}

pub fn verify(args: &VerifyArgs) -> CliResult<(Report, ExitStatus)> {
    let mut config = base_config(CommandKind::Verify, &args.common)?;
    let bounds = args.bound.clone().unwrap_or_else(|| {
        vec![
            BoundId::Thm1PurePath,
            BoundId::CorollaryBures,
            BoundId::FvdgLower,
            BoundId::FvdgUpper,
        ]
    });
    let batch = BatchConfig {
        bounds: bounds.clone(),
        dims: args.dim.clone(),
        samples: args.samples,
        lambda_grid: args.lambda_grid.clone().unwrap_or_else(default_lambda_grid),
        seed: config.seed,
        ensemble: args.ensemble,
        tolerances: config.tolerances,
        workers: args.common.workers,
        keep_samples: args.all_samples,
        negate_gaps: args.inject_fault,
    };
    let result = search::verify_batch(&batch)?;

    let dir = args.common.candidate_dir();
    let mut candidates = Vec::new();
    for s in result.summaries.iter().filter(|s| s.is_candidate()) {
        let Some(worst) = &s.worst else { continue };
        let spec = SampleSpec {
            dim: s.dim,
            ensemble: s.ensemble,
            seed: worst.seed,
        };
        let (rho, sigma) = sample_pair::<f64>(&spec)?;
        candidates.push(save_candidate(
            &dir,
            &format!("d{}_i{}", s.dim, worst.sample_index),
            s.bound_id,
            StateDocument::from_density(&rho),
            StateDocument::from_density(&sigma),
            worst.lambda,
            worst.gap,
        )?);
    }
    for f in &result.failures {
        eprintln!(
            "evaluation failure (d={}, sample {}): {}",
            f.dim, f.sample_index, f.message
        );
    }
    let status = exit_status(
        !result.failures.is_empty() || result.summaries.iter().any(|s| s.is_proved_violation()),
        !candidates.is_empty(),
    );

    config.bounds = bounds;
    config.dims = batch.dims.clone();
    config.samples = Some(batch.samples);
    config.lambda_grid = batch.lambda_grid.clone();
    config.ensemble = args.ensemble;
    config.inject_fault = args.inject_fault;
    let records = result.samples.iter().map(Record::from).collect();
    let details = json!({
        "summaries": result.summaries,
        "failures": result.failures,
        "candidates": candidates,
    });
    Ok((
        Report {
            config,
            exit_status: status.code(),
            records,
            details,
        },
        status,
    ))
}

pub fn search(args: &SearchArgs) -> CliResult<(Report, ExitStatus)> {
    let mut config = base_config(CommandKind::Search, &args.common)?;
    let grid = args.lambda_grid.clone().unwrap_or_else(default_lambda_grid);
    if args.dim.is_empty() {
        return Err(Error::InvalidSpec("no dimensions selected".into()).into());
    }
    let dir = args.common.candidate_dir();
    let mut results = Vec::new();
    let mut records = Vec::new();
    let mut candidates = Vec::new();
    for &dim in &args.dim {
        let cfg = SearchConfig {
            bound_id: args.bound,
            dim,
            restarts: args.restarts,
            max_iters: args.max_iters,
            seed: config.seed,
            lambda_grid: grid.clone(),
            tolerances: config.tolerances,
            workers: args.common.workers,
        };
        let res = search::falsify(&cfg)?;
        let rho = res.argmin.rho.to_state::<f64>()?.density();
        let sigma = res.argmin.sigma.to_state::<f64>()?.density();
        let report = search::evaluate_bound(
            args.bound,
            &rho,
            &sigma,
            res.argmin.lambda,
            &config.tolerances,
        )?;
        records.push(Record::from_report(&report, dim));
        if res.candidate {
            candidates.push(save_candidate(
                &dir,
                &format!("d{dim}_search"),
                args.bound,
                res.argmin.rho.clone(),
                res.argmin.sigma.clone(),
                res.argmin.lambda,
                res.best_gap,
            )?);
        }
        results.push(res);
    }
    let status = exit_status(false, !candidates.is_empty());

    config.bounds = vec![args.bound];
    config.dims = args.dim.clone();
    config.lambda_grid = grid;
    config.restarts = Some(args.restarts);
    config.max_iters = Some(args.max_iters);
    let details = json!({ "results": results, "candidates": candidates });
    Ok((
        Report {
            config,
            exit_status: status.code(),
            records,
            details,
        },
        status,
    ))
}

pub fn landscape(args: &LandscapeArgs) -> CliResult<(Report, ExitStatus)> {
    let mut config = base_config(CommandKind::Landscape, &args.common)?;
    if args.points == 0 {
        return Err(Error::InvalidSpec("points must be positive".into()).into());
    }
    let rows = search::gap_landscape(&LandscapeConfig {
        bound_id: args.bound,
        dim: args.dim,
        lambda: args.lambda,
        r_values: unit_grid(args.points),
        seed: config.seed,
        tolerances: config.tolerances,
    })?;
    let violated = |proved: bool| {
        rows.iter()
            .any(|r| !r.satisfied && r.bound_id.is_proved() == proved)
    };
    let status = exit_status(violated(true), violated(false));

    config.bounds = vec![args.bound];
    config.dims = vec![args.dim];
    config.lambda = Some(args.lambda);
    config.points = Some(args.points);
    let records = rows.iter().map(Record::from).collect();
    Ok((
        Report {
            config,
            exit_status: status.code(),
            records,
            details: serde_json::Value::Null,
        },
        status,
    ))
}
