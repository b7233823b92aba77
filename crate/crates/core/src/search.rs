//! Monte-Carlo verification, adversarial search and overlap landscapes.
//!
//! All routines here work in `f64` and are deterministic given the master seed:
//! every sample or restart draws from its own stream `derive_seed(derive_seed(seed, dim), index)`,
//! work is spread over a dedicated thread pool, and results are reduced in index
//! order, so the worker count never changes a result bit.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundId, BoundReport, PathPair, PathVariant, Tolerances};
use crate::error::{Error, Result};
use crate::io::StateDocument;
use crate::linalg;
use crate::metrics;
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::states::{
    derive_seed, ginibre_factor, mix, rng_from_seed, sample_pair, sample_pure_pair, DensityMatrix,
    Ensemble, SampleSpec,
};

/// Samples evaluated per parallel batch before folding into the summaries.
const CHUNK: usize = 2048;
/// Violating samples retained per (bound, dim) when not keeping every sample.
const MAX_FLAGGED: usize = 1000;
/// Logit bound used when a search starts at `lambda` = 0 or 1.
const LOGIT_CLAMP: f64 = 40.0;

/// Default lambda grid: 0, 0.1, ..., 1 plus 0.01 and 0.99, ascending.
pub fn default_lambda_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=10).map(|i| f64::from(i) / 10.0).collect();
    grid.extend([0.01, 0.99]);
    grid.sort_by(f64::total_cmp);
    grid
}

/// `n` evenly spaced points covering `[0, 1]`.
pub fn unit_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// The ensemble a bound is sampled from unless one is given explicitly.
pub fn default_ensemble(bound: BoundId) -> Ensemble {
    match bound {
        BoundId::Thm1PurePath => Ensemble::HaarPure,
        _ => Ensemble::GinibreFullRank,
    }
}

fn stream_seed(seed: u64, dim: usize, index: usize) -> u64 {
    derive_seed(derive_seed(seed, dim as u64), index as u64)
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidSpec("lambda grid is empty".into()));
    }
    match grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        Some(&l) => Err(Error::LambdaOutOfRange(l)),
        None => Ok(()),
    }
}

fn check_dim(dim: usize, min: usize) -> Result<()> {
    if dim < min {
        return Err(Error::InvalidSpec(format!(
            "dim = {dim} must be at least {min}"
        )));
    }
    Ok(())
}

/// One bound instance evaluated on one sampled pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSample {
    pub bound_id: BoundId,
    pub dim: usize,
    pub sample_index: usize,
    pub seed: u64,
    pub lambda: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub tolerance: f64,
    pub satisfied: bool,
}

impl GapSample {
    fn from_report(r: &BoundReport<f64>, dim: usize, sample_index: usize, seed: u64) -> Self {
        Self {
            bound_id: r.bound_id,
            dim,
            sample_index,
            seed,
            lambda: r.lambda,
            lhs: r.lhs,
            rhs: r.rhs,
            gap: r.gap,
            tolerance: r.tolerance,
            satisfied: r.satisfied,
        }
    }

    fn negated(mut self) -> Self {
        self.gap = -self.gap;
        self.satisfied = self.gap >= -self.tolerance;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub bounds: Vec<BoundId>,
    pub dims: Vec<usize>,
    /// Pairs drawn per dimension and ensemble.
    pub samples: usize,
    pub lambda_grid: Vec<f64>,
    pub seed: u64,
    /// Overrides [`default_ensemble`] for every bound.
    pub ensemble: Option<Ensemble>,
    pub tolerances: Tolerances,
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
    /// Keep every sample rather than only violations and per-bound extremes.
    pub keep_samples: bool,
    /// Test hook: flips the sign of every gap.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub negate_gaps: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            bounds: BoundId::ALL.to_vec(),
            dims: vec![2, 3, 4],
            samples: 1000,
            lambda_grid: default_lambda_grid(),
            seed: 0,
            ensemble: None,
            tolerances: Tolerances::default(),
            workers: 0,
            keep_samples: false,
            negate_gaps: false,
        }
    }
}

impl BatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bounds.is_empty() {
            return Err(Error::InvalidSpec("no bounds selected".into()));
        }
        if self.dims.is_empty() {
            return Err(Error::InvalidSpec("no dimensions selected".into()));
        }
        for &d in &self.dims {
            check_dim(d, 1)?;
        }
        if self.samples == 0 {
            return Err(Error::InvalidSpec("samples must be positive".into()));
        }
        if self.bounds.iter().any(|b| b.uses_lambda()) {
            check_grid(&self.lambda_grid)?;
        }
        self.tolerances.validate()?;
        for &b in &self.bounds {
            let ensemble = self.ensemble_for(b);
            if b == BoundId::Thm1PurePath && !ensemble.is_pure() {
                return Err(Error::InvalidSpec(format!(
                    "{b} needs a pure-state ensemble, got {ensemble}"
                )));
            }
            for &dim in &self.dims {
                SampleSpec {
                    dim,
                    ensemble,
                    seed: 0,
                }
                .validate()?;
            }
        }
        Ok(())
    }

    fn ensemble_for(&self, bound: BoundId) -> Ensemble {
        self.ensemble.unwrap_or_else(|| default_ensemble(bound))
    }

    /// Bounds grouped by ensemble, in first-appearance order.
    fn groups(&self) -> Vec<(Ensemble, Vec<BoundId>)> {
        let mut groups: Vec<(Ensemble, Vec<BoundId>)> = Vec::new();
        for &b in &self.bounds {
            let e = self.ensemble_for(b);
            match groups.iter_mut().find(|(g, _)| *g == e) {
                Some((_, members)) if !members.contains(&b) => members.push(b),
                Some(_) => {}
                None => groups.push((e, vec![b])),
            }
        }
        groups
    }
}

/// A sampled pair whose evaluation raised an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationFailure {
    pub dim: usize,
    pub ensemble: Ensemble,
    pub sample_index: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub bound_id: BoundId,
    pub dim: usize,
    pub ensemble: Ensemble,
    pub count: usize,
    pub min_gap: f64,
    pub mean_gap: f64,
    /// Samples with `gap < -tolerance`.
    pub below_tolerance: usize,
    pub worst: Option<GapSample>,
}

impl BatchSummary {
    pub fn is_proved_violation(&self) -> bool {
        self.bound_id.is_proved() && self.below_tolerance > 0
    }

    pub fn is_candidate(&self) -> bool {
        !self.bound_id.is_proved() && self.below_tolerance > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub summaries: Vec<BatchSummary>,
    /// Every sample, or only violations and per-summary minima.
    pub samples: Vec<GapSample>,
    pub failures: Vec<EvaluationFailure>,
}

impl BatchResult {
    pub fn min_gap(&self, bound: BoundId) -> Option<f64> {
        self.summaries
            .iter()
            .filter(|s| s.bound_id == bound && s.count > 0)
            .map(|s| s.min_gap)
            .min_by(f64::total_cmp)
    }
}

struct Accumulator {
    summary: BatchSummary,
    sum: f64,
    flagged: usize,
}

impl Accumulator {
    fn new(bound_id: BoundId, dim: usize, ensemble: Ensemble) -> Self {
        Self {
            summary: BatchSummary {
                bound_id,
                dim,
                ensemble,
                count: 0,
                min_gap: f64::INFINITY,
                mean_gap: f64::NAN,
                below_tolerance: 0,
                worst: None,
            },
            sum: 0.0,
            flagged: 0,
        }
    }

    fn push(&mut self, s: &GapSample, keep: &mut Vec<GapSample>, keep_all: bool) {
        let summary = &mut self.summary;
        summary.count += 1;
        self.sum += s.gap;
        if s.gap < summary.min_gap || summary.worst.is_none() {
            summary.min_gap = s.gap;
            summary.worst = Some(s.clone());
        }
        if !s.satisfied {
            summary.below_tolerance += 1;
        }
        if keep_all {
            keep.push(s.clone());
        } else if !s.satisfied && self.flagged < MAX_FLAGGED {
            self.flagged += 1;
            keep.push(s.clone());
        }
    }

    fn finish(mut self) -> BatchSummary {
        if self.summary.count > 0 {
            self.summary.mean_gap = self.sum / self.summary.count as f64;
        }
        self.summary
    }
}

fn evaluate_pair(
    cfg: &BatchConfig,
    ensemble: Ensemble,
    bounds_in_group: &[BoundId],
    dim: usize,
    index: usize,
) -> Result<Vec<GapSample>> {
    let seed = stream_seed(cfg.seed, dim, index);
    let spec = SampleSpec {
        dim,
        ensemble,
        seed,
    };
    let tol = &cfg.tolerances;
    let mut reports: Vec<BoundReport<f64>> = Vec::new();

    if bounds_in_group.contains(&BoundId::Thm1PurePath) {
        let (psi, phi) = sample_pure_pair::<f64>(&spec)?;
        let r = psi.inner(&phi).norm().min(1.0);
        for &lambda in &cfg.lambda_grid {
            reports.push(bounds::thm1_bound(r, lambda, tol)?);
        }
    }
    let matrix_bounds: Vec<BoundId> = bounds_in_group
        .iter()
        .copied()
        .filter(|b| *b != BoundId::Thm1PurePath)
        .collect();
    if !matrix_bounds.is_empty() {
        let (rho, sigma) = sample_pair::<f64>(&spec)?;
        let pair = PathPair::new(&rho, &sigma)?;
        let want = |b: BoundId| matrix_bounds.contains(&b);
        if want(BoundId::FvdgLower) || want(BoundId::FvdgUpper) {
            let (lower, upper) = pair.fvdg(tol);
            for r in [lower, upper] {
                if want(r.bound_id) {
                    reports.push(r);
                }
            }
        }
        if want(BoundId::SmaxLower) {
            reports.push(pair.smax_bound(tol)?);
        }
        let corollary = want(BoundId::CorollaryBures);
        let conjecture = want(BoundId::ConjecturePath);
        if corollary || conjecture {
            for &lambda in &cfg.lambda_grid {
                for r in pair.check_both(lambda, tol)? {
                    if want(r.bound_id) {
                        reports.push(r);
                    }
                }
            }
        }
    }
    let samples = reports
        .iter()
        .map(|r| GapSample::from_report(r, dim, index, seed));
    Ok(if cfg.negate_gaps {
        samples.map(GapSample::negated).collect()
    } else {
        samples.collect()
    })
}

/// Evaluates every configured bound on `samples` pairs per dimension.
///
/// Summaries are ordered by dimension, then ensemble group, then bound.
pub fn verify_batch(cfg: &BatchConfig) -> Result<BatchResult> {
    cfg.validate()?;
    let pool = thread_pool(cfg.workers)?;
    let mut summaries = Vec::new();
    let mut kept = Vec::new();
    let mut failures = Vec::new();

    for &dim in &cfg.dims {
        for (ensemble, members) in cfg.groups() {
            let mut accs: Vec<Accumulator> = members
                .iter()
                .map(|&b| Accumulator::new(b, dim, ensemble))
                .collect();
            let mut start = 0;
            while start < cfg.samples {
                let end = (start + CHUNK).min(cfg.samples);
                let chunk: Vec<Result<Vec<GapSample>>> = pool.install(|| {
                    (start..end)
                        .into_par_iter()
                        .map(|i| evaluate_pair(cfg, ensemble, &members, dim, i))
                        .collect()
                });
                for (offset, outcome) in chunk.into_iter().enumerate() {
                    let index = start + offset;
                    match outcome {
                        Ok(samples) => {
                            for s in &samples {
                                let acc = accs
                                    .iter_mut()
                                    .find(|a| a.summary.bound_id == s.bound_id)
                                    .expect("sample bound belongs to its group");
                                acc.push(s, &mut kept, cfg.keep_samples);
                            }
                        }
                        Err(e) => failures.push(EvaluationFailure {
                            dim,
                            ensemble,
                            sample_index: index,
                            seed: stream_seed(cfg.seed, dim, index),
                            message: e.to_string(),
                        }),
                    }
                }
                start = end;
            }
            summaries.extend(accs.into_iter().map(Accumulator::finish));
        }
    }

    if !cfg.keep_samples {
        for s in &summaries {
            if let Some(w) = &s.worst {
                if w.satisfied {
                    kept.push(w.clone());
                }
            }
        }
    }
    Ok(BatchResult {
        summaries,
        samples: kept,
        failures,
    })
}

/// Unconstrained coordinates for a pair of density matrices and a mixing weight.
///
/// Each state is `G G^dagger / tr(G G^dagger)` for a complex d x d factor `G`
/// stored as interleaved (re, im) pairs in row-major order; `lambda` is the
/// logistic function of a final logit coordinate when present.
#[derive(Debug, Clone, PartialEq)]
pub struct StateParams {
    pub dim: usize,
    pub with_lambda: bool,
}

impl StateParams {
    pub fn len(&self) -> usize {
        4 * self.dim * self.dim + usize::from(self.with_lambda)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates reproducing the given factors and weight.
    pub fn encode(
        &self,
        g_rho: &[Complex<f64>],
        g_sigma: &[Complex<f64>],
        lambda: Option<f64>,
    ) -> Vec<f64> {
        let mut x: Vec<f64> = g_rho
            .iter()
            .chain(g_sigma)
            .flat_map(|z| [z.re, z.im])
            .collect();
        if self.with_lambda {
            let l = lambda.unwrap_or(0.5);
            x.push((l.ln() - (1.0 - l).ln()).clamp(-LOGIT_CLAMP, LOGIT_CLAMP));
        }
        x
    }

    /// Total on finite inputs: a vanishing factor decodes to the maximally mixed state.
    pub fn decode(
        &self,
        x: &[f64],
    ) -> Result<(DensityMatrix<f64>, DensityMatrix<f64>, Option<f64>)> {
        if x.len() != self.len() {
            return Err(Error::InvalidSpec(format!(
                "expected {} coordinates, got {}",
                self.len(),
                x.len()
            )));
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(format!("non-finite coordinate {bad}")));
        }
        let block = 2 * self.dim * self.dim;
        let rho = self.decode_factor(&x[..block]);
        let sigma = self.decode_factor(&x[block..2 * block]);
        let lambda = self.with_lambda.then(|| {
            let t = x[2 * block];
            1.0 / (1.0 + (-t).exp())
        });
        Ok((rho, sigma, lambda))
    }

    fn decode_factor(&self, coords: &[f64]) -> DensityMatrix<f64> {
        let scale = coords.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return DensityMatrix::maximally_mixed(self.dim);
        }
        let g: Vec<Complex<f64>> = coords
            .chunks_exact(2)
            .map(|c| Complex::new(c[0] / scale, c[1] / scale))
            .collect();
        DensityMatrix::from_factor(&g, self.dim, self.dim)
            .unwrap_or_else(|_| DensityMatrix::maximally_mixed(self.dim))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub bound_id: BoundId,
    pub dim: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Starting weights scanned at each restart's initial pair.
    pub lambda_grid: Vec<f64>,
    pub tolerances: Tolerances,
    pub workers: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            bound_id: BoundId::ConjecturePath,
            dim: 2,
            restarts: 50,
            max_iters: 2000,
            seed: 0,
            lambda_grid: default_lambda_grid(),
            tolerances: Tolerances::default(),
            workers: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.bound_id, BoundId::ConjecturePath | BoundId::SmaxLower) {
            return Err(Error::InvalidSpec(format!(
                "search targets conjecture_path or smax_lower, not {}",
                self.bound_id
            )));
        }
        check_dim(self.dim, 2)?;
        if self.restarts == 0 {
            return Err(Error::InvalidSpec("restarts must be positive".into()));
        }
        if self.bound_id.uses_lambda() {
            check_grid(&self.lambda_grid)?;
        }
        self.tolerances.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub seed: u64,
    /// Best gap over the lambda grid at the sampled starting pair. The simplex
    /// itself starts from the best weight below one, where the bound is not
    /// trivially tight.
    pub start_gap: f64,
    pub best_gap: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Argmin {
    pub rho: StateDocument,
    pub sigma: StateDocument,
    pub lambda: Option<f64>,
}

impl Argmin {
    fn new(rho: &DensityMatrix<f64>, sigma: &DensityMatrix<f64>, lambda: Option<f64>) -> Self {
        Self {
            rho: StateDocument::from_density(rho),
            sigma: StateDocument::from_density(sigma),
            lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub bound_id: BoundId,
    pub dim: usize,
    pub best_gap: f64,
    pub argmin: Argmin,
    /// Total simplex iterations over all restarts.
    pub iterations: usize,
    pub restarts: usize,
    /// Whether the restart that produced `best_gap` converged.
    pub converged: bool,
    /// See [`recheck_gap`].
    pub recheck_gap: f64,
    pub candidate: bool,
    /// Objective evaluations that raised an error (scored as `+inf`).
    pub failures: usize,
    pub trace: Vec<RestartTrace>,
}

/// Gap with the fidelity side taken as the larger of the two fidelity routes, so
/// that route disagreement near rank deficiency can only raise the gap.
fn lenient_gap(
    bound: BoundId,
    rho: &DensityMatrix<f64>,
    sigma: &DensityMatrix<f64>,
    lambda: Option<f64>,
) -> Result<f64> {
    let norm = metrics::trace_norm_distance(rho, sigma)?;
    let lenient = |a: &DensityMatrix<f64>, b: &DensityMatrix<f64>| -> Result<f64> {
        let (spectral, nuclear) = metrics::fidelity_routes(a, b)?;
        Ok(spectral.max(nuclear).min(1.0))
    };
    match bound {
        BoundId::ConjecturePath => {
            let lambda = lambda.ok_or_else(|| Error::InvalidSpec("missing lambda".into()))?;
            let path = mix(rho, sigma, lambda)?;
            let lhs = lenient(rho, &path)?;
            Ok(lhs - (1.0 - (1.0 - lambda.sqrt()) * norm / 2.0))
        }
        BoundId::SmaxLower => {
            let s = metrics::smax(rho, sigma)?;
            let f = lenient(rho, sigma)?;
            let rhs = 1.0 - 0.5 * bounds::smax_factor(s.lambda0) * norm;
            let degenerate =
                s.is_finite() && (s.lambda0 - 1.0).abs() <= bounds::DEGENERATE_LAMBDA0_TOL;
            Ok(if degenerate { 1.0 - rhs } else { f - rhs })
        }
        other => Err(Error::InvalidSpec(format!(
            "no search objective for {other}"
        ))),
    }
}

fn strict_gap(
    bound: BoundId,
    rho: &DensityMatrix<f64>,
    sigma: &DensityMatrix<f64>,
    lambda: Option<f64>,
    tol: &Tolerances,
) -> Result<f64> {
    Ok(evaluate_bound(bound, rho, sigma, lambda, tol)?.gap)
}

struct RestartOutcome {
    trace: RestartTrace,
    best: (DensityMatrix<f64>, DensityMatrix<f64>, Option<f64>),
}

fn run_restart(cfg: &SearchConfig, restart: usize) -> Result<RestartOutcome> {
    let seed = stream_seed(cfg.seed, cfg.dim, restart);
    let spec = SampleSpec {
        dim: cfg.dim,
        ensemble: Ensemble::GinibreFullRank,
        seed,
    };
    let (rho0, sigma0) = sample_pair::<f64>(&spec)?;
    let tol = &cfg.tolerances;

    let (start_gap, start_lambda, simplex_lambda) = if cfg.bound_id.uses_lambda() {
        let pair = PathPair::new(&rho0, &sigma0)?;
        let mut overall = (f64::INFINITY, cfg.lambda_grid[0]);
        let mut interior: Option<(f64, f64)> = None;
        for &l in &cfg.lambda_grid {
            let gap = pair.check(l, PathVariant::ConjectureTracenorm, tol)?.gap;
            if gap < overall.0 {
                overall = (gap, l);
            }
            if l < 1.0 && interior.is_none_or(|(g, _)| gap < g) {
                interior = Some((gap, l));
            }
        }
        let simplex_lambda = interior.map_or(overall.1, |(_, l)| l);
        (overall.0, Some(overall.1), Some(simplex_lambda))
    } else {
        (
            strict_gap(cfg.bound_id, &rho0, &sigma0, None, tol)?,
            None,
            None,
        )
    };

    let params = StateParams {
        dim: cfg.dim,
        with_lambda: cfg.bound_id.uses_lambda(),
    };
    let mut rng = rng_from_seed(seed);
    let g_rho = ginibre_factor::<f64>(&mut rng, cfg.dim, cfg.dim);
    let g_sigma = ginibre_factor::<f64>(&mut rng, cfg.dim, cfg.dim);
    let x0 = params.encode(&g_rho, &g_sigma, simplex_lambda);

    let failures = AtomicUsize::new(0);
    let cost = |x: &[f64]| match params
        .decode(x)
        .and_then(|(r, s, l)| lenient_gap(cfg.bound_id, &r, &s, l))
    {
        Ok(g) => g,
        Err(_) => {
            failures.fetch_add(1, Ordering::Relaxed);
            f64::INFINITY
        }
    };
    let opts = NelderMeadOptions {
        max_iters: cfg.max_iters,
        ..Default::default()
    };
    let nm = nelder_mead(cost, &x0, &opts);

    let (best_gap, best) = if nm.fx < start_gap {
        (nm.fx, params.decode(&nm.x)?)
    } else {
        (start_gap, (rho0, sigma0, start_lambda))
    };
    Ok(RestartOutcome {
        trace: RestartTrace {
            restart,
            seed,
            start_gap,
            best_gap,
            iterations: nm.iterations,
            evaluations: nm.evaluations,
            converged: nm.converged,
            failures: failures.into_inner(),
        },
        best,
    })
}

/// Gap at `(rho, sigma, lambda)` recomputed after re-symmetrizing the inputs,
/// with the strict fidelity check; if the two fidelity routes disagree, the
/// larger of them is used instead.
pub fn recheck_gap(
    bound: BoundId,
    rho: &DensityMatrix<f64>,
    sigma: &DensityMatrix<f64>,
    lambda: Option<f64>,
    tol: &Tolerances,
) -> Result<f64> {
    let clean = |m: &DensityMatrix<f64>| DensityMatrix::new(m.matrix().symmetrized());
    let (rho, sigma) = (clean(rho)?, clean(sigma)?);
    match strict_gap(bound, &rho, &sigma, lambda, tol) {
        Err(Error::NumericalFailure(_)) => lenient_gap(bound, &rho, &sigma, lambda),
        other => other,
    }
}

/// Multi-start Nelder-Mead minimization of the gap of an unproven bound.
///
/// Restart `i` starts from the same pair `verify_batch` draws as sample `i`
/// (full-rank Ginibre), so `best_gap` never exceeds the batch minimum over the
/// first `restarts` samples on the same grid.
pub fn falsify(cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let pool = thread_pool(cfg.workers)?;
    let outcomes: Vec<Result<RestartOutcome>> = pool.install(|| {
        (0..cfg.restarts)
            .into_par_iter()
            .map(|i| run_restart(cfg, i))
            .collect()
    });

    let mut best: Option<RestartOutcome> = None;
    let mut trace = Vec::with_capacity(cfg.restarts);
    for outcome in outcomes {
        let outcome = outcome?;
        trace.push(outcome.trace.clone());
        if best
            .as_ref()
            .is_none_or(|b| outcome.trace.best_gap < b.trace.best_gap)
        {
            best = Some(outcome);
        }
    }
    let best = best.expect("at least one restart");
    let (rho, sigma, lambda) = &best.best;
    let recheck = recheck_gap(cfg.bound_id, rho, sigma, *lambda, &cfg.tolerances)?;
    let threshold = -cfg.tolerances.candidate;
    Ok(SearchResult {
        bound_id: cfg.bound_id,
        dim: cfg.dim,
        best_gap: best.trace.best_gap,
        argmin: Argmin::new(rho, sigma, *lambda),
        iterations: trace.iter().map(|t| t.iterations).sum(),
        restarts: cfg.restarts,
        converged: best.trace.converged,
        recheck_gap: recheck,
        candidate: best.trace.best_gap < threshold && recheck < threshold,
        failures: trace.iter().map(|t| t.failures).sum(),
        trace,
    })
}

/// Evaluates one bound on an explicit pair; `thm1_pure_path` needs both states pure.
pub fn evaluate_bound(
    bound: BoundId,
    rho: &DensityMatrix<f64>,
    sigma: &DensityMatrix<f64>,
    lambda: Option<f64>,
    tol: &Tolerances,
) -> Result<BoundReport<f64>> {
    let need_lambda = || lambda.ok_or_else(|| Error::InvalidSpec(format!("{bound} needs lambda")));
    match bound {
        BoundId::FvdgLower => Ok(bounds::fvdg(rho, sigma, tol)?.0),
        BoundId::FvdgUpper => Ok(bounds::fvdg(rho, sigma, tol)?.1),
        BoundId::SmaxLower => bounds::smax_bound(rho, sigma, tol),
        BoundId::CorollaryBures => {
            bounds::path_bound_check(rho, sigma, need_lambda()?, PathVariant::CorollaryBures, tol)
        }
        BoundId::ConjecturePath => bounds::path_bound_check(
            rho,
            sigma,
            need_lambda()?,
            PathVariant::ConjectureTracenorm,
            tol,
        ),
        BoundId::Thm1PurePath => {
            if !(bounds::is_pure(rho)? && bounds::is_pure(sigma)?) {
                return Err(Error::InvalidState(format!(
                    "{bound} needs two pure states"
                )));
            }
            let r = metrics::fidelity(rho, sigma)?.min(1.0);
            bounds::thm1_bound(r, need_lambda()?, tol)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeConfig {
    pub bound_id: BoundId,
    pub dim: usize,
    pub lambda: f64,
    /// Overlaps `r = |<psi|phi>|` to scan.
    pub r_values: Vec<f64>,
    pub seed: u64,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeRow {
    pub bound_id: BoundId,
    pub dim: usize,
    pub r: f64,
    pub lambda: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub satisfied: bool,
}

/// Gap along pure pairs with pinned overlap `r`.
///
/// `thm1_pure_path` is evaluated in closed form; every other bound on a
/// Haar-rotated pair with overlap `r`.
pub fn gap_landscape(cfg: &LandscapeConfig) -> Result<Vec<LandscapeRow>> {
    check_dim(cfg.dim, 2)?;
    check_grid(&[cfg.lambda])?;
    cfg.tolerances.validate()?;
    let lambda = cfg.bound_id.uses_lambda().then_some(cfg.lambda);
    cfg.r_values
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let report = if cfg.bound_id == BoundId::Thm1PurePath {
                bounds::thm1_bound(r, cfg.lambda, &cfg.tolerances)?
            } else {
                let spec = SampleSpec {
                    dim: cfg.dim,
                    ensemble: Ensemble::PurePairWithOverlap { r },
                    seed: stream_seed(cfg.seed, cfg.dim, i),
                };
                let (rho, sigma) = sample_pair::<f64>(&spec)?;
                evaluate_bound(cfg.bound_id, &rho, &sigma, lambda, &cfg.tolerances)?
            };
            Ok(LandscapeRow {
                bound_id: cfg.bound_id,
                dim: cfg.dim,
                r,
                lambda: report.lambda,
                lhs: report.lhs,
                rhs: report.rhs,
                gap: report.gap,
                satisfied: report.satisfied,
            })
        })
        .collect()
}

/// Smallest eigenvalue of `lambda0 (1 + slack) sigma - rho`, certifying `rho <= lambda0 sigma`.
pub fn lambda0_certificate(
    rho: &DensityMatrix<f64>,
    sigma: &DensityMatrix<f64>,
    lambda0: f64,
    slack: f64,
) -> Result<f64> {
    let m = &sigma.matrix().scale(lambda0 * (1.0 + slack)) - rho.matrix();
    linalg::min_eigenvalue(&m.symmetrized())
}
