//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fidelity_bounds::bounds::{self, BoundId, Tolerances};
use fidelity_bounds::io::read_state;
use fidelity_bounds::metrics;
use fidelity_bounds::search::{
    falsify, lambda0_certificate, recheck_gap, verify_batch, BatchConfig, BatchResult,
    SearchConfig, SearchResult,
};
use fidelity_bounds::states::{
    haar_pure, optimal_purifications, partial_trace_second, rng_from_seed, sample_pair, Ensemble,
    SampleSpec,
};
use fidelity_bounds::{DensityMatrix64, PureState64};

const SEED: u64 = fidelity_bounds_cli::DEFAULT_SEED;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn min_gap(res: &BatchResult, bound: BoundId) -> f64 {
    res.min_gap(bound).unwrap_or(f64::NAN)
}

fn criterion_1() -> Outcome {
    let tol = Tolerances::default();
    let mut worst = f64::INFINITY;
    let mut zero_set_ok = true;
    for i in 0..=100 {
        let lambda = f64::from(i) / 100.0;
        for j in 0..=100 {
            let r = f64::from(j) / 100.0;
            let gap = bounds::thm1_bound(r, lambda, &tol).unwrap().gap;
            worst = worst.min(gap);
            let on_zero_set = j == 0 || j == 100 || i == 100;
            if on_zero_set != (gap.abs() <= 1e-12) {
                zero_set_ok = false;
            }
        }
    }
    check(
        worst >= -1e-12 && zero_set_ok,
        format!("min gap {worst:.3e}, zero set exact: {zero_set_ok}"),
    )
}

fn criterion_2() -> Outcome {
    let tol = Tolerances::default();
    let mut worst = 0.0f64;
    for i in 0..=100 {
        let lambda = f64::from(i) / 100.0;
        for j in 0..=100 {
            let r = f64::from(j) / 100.0;
            let rep = bounds::thm1_bound(r, lambda, &tol).unwrap();
            if rep.rhs >= 0.0 {
                let f = bounds::thm1_gap_f(lambda, r).unwrap();
                worst = worst.max((f - (rep.lhs * rep.lhs - rep.rhs * rep.rhs)).abs());
            }
        }
    }
    check(
        worst <= 1e-10,
        format!("max |gap_f - (lhs^2 - rhs^2)| = {worst:.3e}"),
    )
}

fn mixed_batch(workers: usize) -> BatchResult {
    verify_batch(&BatchConfig {
        bounds: vec![
            BoundId::CorollaryBures,
            BoundId::FvdgLower,
            BoundId::FvdgUpper,
        ],
        dims: vec![2, 3, 4, 8],
        samples: 10_000,
        seed: SEED,
        workers,
        ..Default::default()
    })
    .unwrap()
}

fn pure_batch(workers: usize) -> BatchResult {
    verify_batch(&BatchConfig {
        bounds: vec![BoundId::FvdgLower, BoundId::FvdgUpper],
        dims: vec![2, 3, 4, 8],
        samples: 10_000,
        seed: SEED,
        ensemble: Some(Ensemble::HaarPure),
        workers,
        keep_samples: true,
        ..Default::default()
    })
    .unwrap()
}

fn criterion_3(mixed: &BatchResult) -> Outcome {
    let gap = min_gap(mixed, BoundId::CorollaryBures);
    let count: usize = mixed
        .summaries
        .iter()
        .filter(|s| s.bound_id == BoundId::CorollaryBures)
        .map(|s| s.count)
        .sum();
    check(
        gap >= -1e-7 && mixed.failures.is_empty() && count == 4 * 10_000 * 13,
        format!(
            "min gap {gap:.3e} over {count} evaluations, {} failures",
            mixed.failures.len()
        ),
    )
}

fn criterion_4(mixed: &BatchResult, pure: &BatchResult) -> Outcome {
    let lower = min_gap(mixed, BoundId::FvdgLower).min(min_gap(pure, BoundId::FvdgLower));
    let upper = min_gap(mixed, BoundId::FvdgUpper).min(min_gap(pure, BoundId::FvdgUpper));
    let pure_upper_max = pure
        .samples
        .iter()
        .filter(|s| s.bound_id == BoundId::FvdgUpper)
        .map(|s| s.gap)
        .fold(f64::NEG_INFINITY, f64::max);
    check(
        lower >= -1e-9 && upper >= -1e-9 && pure_upper_max <= 1e-8 && pure.failures.is_empty(),
        format!("min lower gap {lower:.3e}, min upper gap {upper:.3e}, max upper gap on pure pairs {pure_upper_max:.3e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut overlap_err = 0.0f64;
    let mut trace_err = 0.0f64;
    for dim in [2usize, 3, 4] {
        for i in 0..334u64 {
            let spec = SampleSpec {
                dim,
                ensemble: Ensemble::GinibreFullRank,
                seed: SEED ^ (i << 8) ^ dim as u64,
            };
            let (rho, sigma) = sample_pair::<f64>(&spec).unwrap();
            let (psi, phi) = optimal_purifications(&rho, &sigma).unwrap();
            let f = metrics::fidelity(&rho, &sigma).unwrap();
            overlap_err = overlap_err.max((psi.inner(&phi).norm() - f).abs());
            for (p, s) in [(&psi, &rho), (&phi, &sigma)] {
                let reduced = partial_trace_second(p, dim, dim).unwrap();
                trace_err = trace_err.max(reduced.max_abs_diff(s.matrix()));
            }
        }
    }
    check(
        overlap_err <= 1e-7 && trace_err <= 1e-8,
        format!("max ||<Psi|Phi>| - F| = {overlap_err:.3e}, max partial-trace error {trace_err:.3e} (1002 pairs)"),
    )
}

fn criterion_6() -> Outcome {
    let (mut cert, mut residual, mut identity) = (f64::INFINITY, 0.0f64, 0.0f64);
    let mut failures = 0;
    for dim in [2usize, 3, 4] {
        for i in 0..334u64 {
            let spec = SampleSpec {
                dim,
                ensemble: Ensemble::GinibreFullRank,
                seed: SEED.wrapping_add(i * 7919 + dim as u64),
            };
            let (rho, sigma) = sample_pair::<f64>(&spec).unwrap();
            match bounds::decompose(&rho, &sigma) {
                Ok(d) => {
                    cert = cert.min(lambda0_certificate(&rho, &sigma, d.lambda0, 1e-7).unwrap());
                    residual = residual.max(d.residual);
                    identity = identity.max(d.trace_identity_error);
                }
                Err(_) => failures += 1,
            }
        }
    }
    check(
        cert >= -1e-7 && residual <= 1e-8 && identity <= 1e-7 && failures == 0,
        format!(
            "min eig certificate {cert:.3e}, max residual {residual:.3e}, max trace-identity error {identity:.3e}, {failures} failures"
        ),
    )
}

fn criterion_7() -> Outcome {
    let tol = Tolerances::default();
    let mut worst = 0.0f64;
    let mut sides = 0.0f64;
    for dim in [2usize, 3, 4, 9, 16] {
        let psi: PureState64 = haar_pure(&mut rng_from_seed(SEED + dim as u64), dim);
        let rep = bounds::smax_bound(&psi.density(), &DensityMatrix64::maximally_mixed(dim), &tol)
            .unwrap();
        let target = 1.0 / (dim as f64).sqrt();
        worst = worst.max(rep.gap.abs());
        sides = sides
            .max((rep.lhs - target).abs())
            .max((rep.rhs - target).abs());
    }
    check(
        worst <= 1e-8 && sides <= 1e-8,
        format!("max |gap| {worst:.3e}, max side error vs 1/sqrt(d) {sides:.3e}"),
    )
}

fn conjecture_batch(workers: usize) -> BatchResult {
    verify_batch(&BatchConfig {
        bounds: vec![BoundId::ConjecturePath],
        dims: vec![2, 3, 4],
        samples: 100_000,
        seed: SEED,
        workers,
        ..Default::default()
    })
    .unwrap()
}

fn conjecture_search(dim: usize, workers: usize) -> SearchResult {
    falsify(&SearchConfig {
        bound_id: BoundId::ConjecturePath,
        dim,
        restarts: 50,
        max_iters: 2000,
        seed: SEED,
        workers,
        ..Default::default()
    })
    .unwrap()
}

/// Runs the CLI with the criterion's threshold as candidate tolerance and
/// checks the exit status and the serialized, re-checkable candidate.
fn candidate_contract(dim: usize, search: bool) -> bool {
    let dir = std::env::temp_dir().join(format!("fidbounds-acceptance-{}", std::process::id()));
    let dims = dim.to_string();
    let mut args = if search {
        vec!["search", "--restarts", "50", "--max-iters", "2000"]
    } else {
        vec!["verify", "--samples", "100000"]
    };
    args.extend([
        "--bound",
        "conjecture_path",
        "--dim",
        &dims,
        "--tol-candidate",
        "1e-9",
    ]);
    let dir_str = dir.to_str().unwrap().to_owned();
    args.extend(["--candidate-dir", &dir_str, "--out", "/dev/null"]);
    let status = Command::new(env!("CARGO_BIN_EXE_fidbounds"))
        .args(&args)
        .status()
        .unwrap();
    let files: Vec<_> = std::fs::read_dir(&dir)
        .map(|d| d.flatten().map(|e| e.path()).collect())
        .unwrap_or_default();
    let parsed = files.iter().all(|f| read_state::<f64>(f).is_ok());
    status.code() == Some(3) && files.len() >= 2 && parsed
}

fn criterion_8(batch: &BatchResult, searches: &[SearchResult]) -> Outcome {
    let verify_min = min_gap(batch, BoundId::ConjecturePath);
    let search_min = searches
        .iter()
        .map(|s| s.best_gap)
        .fold(f64::INFINITY, f64::min);
    let mut detail = format!(
        "verify min gap {verify_min:.3e} ({} failures), search best gaps {}",
        batch.failures.len(),
        searches
            .iter()
            .map(|s| format!("d={}: {:.3e}", s.dim, s.best_gap))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let mut pass = batch.failures.is_empty() && searches.iter().all(|s| s.restarts >= 50);
    for s in searches.iter().filter(|s| s.best_gap < -1e-9) {
        let rho = s.argmin.rho.to_state::<f64>().unwrap().density();
        let sigma = s.argmin.sigma.to_state::<f64>().unwrap().density();
        let rechecked = recheck_gap(
            s.bound_id,
            &rho,
            &sigma,
            s.argmin.lambda,
            &Tolerances::default(),
        )
        .unwrap();
        detail += &format!("; candidate d={} rechecks to {rechecked:.3e}", s.dim);
        pass &= candidate_contract(s.dim, true);
    }
    if verify_min < -1e-9 {
        let worst = batch
            .summaries
            .iter()
            .min_by(|a, b| a.min_gap.total_cmp(&b.min_gap))
            .unwrap();
        pass &= candidate_contract(worst.dim, false);
        detail += "; verify candidate exit-3 contract checked";
    }
    check(pass && !search_min.is_nan(), detail)
}

fn summaries_json(res: &BatchResult) -> String {
    serde_json::to_string(&res.summaries).unwrap()
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome, Duration, Option<Duration>)> = Vec::new();

    let (o, t) = timed(criterion_1);
    results.push((
        1,
        "thm1 pure-path bound on 101x101 grid",
        o,
        t,
        Some(Duration::from_secs(1)),
    ));
    let (o, t) = timed(criterion_2);
    results.push((2, "thm1_gap_f factorization", o, t, None));

    let start = Instant::now();
    let mixed = mixed_batch(0);
    let mixed_time = start.elapsed();
    let o = criterion_3(&mixed);
    results.push((
        3,
        "corollary Bures bound, 1e4 Ginibre pairs x 13 lambda, d in {2,3,4,8}",
        o,
        mixed_time,
        Some(Duration::from_secs(300)),
    ));

    let start = Instant::now();
    let pure = pure_batch(0);
    let pure_time = start.elapsed();
    let o = criterion_4(&mixed, &pure);
    results.push((
        4,
        "Fuchs-van de Graaf sandwich (mixed + pure pairs)",
        o,
        pure_time,
        None,
    ));

    let (o, t) = timed(criterion_5);
    results.push((5, "Uhlmann purifications and partial trace", o, t, None));
    let (o, t) = timed(criterion_6);
    results.push((6, "lambda0 certificate and decomposition", o, t, None));
    let (o, t) = timed(criterion_7);
    results.push((
        7,
        "smax bound tight for pure vs maximally mixed",
        o,
        t,
        None,
    ));

    let start = Instant::now();
    let conj = conjecture_batch(0);
    let searches: Vec<SearchResult> = [2, 3]
        .into_iter()
        .map(|d| conjecture_search(d, 0))
        .collect();
    let conj_time = start.elapsed();
    let o = criterion_8(&conj, &searches);
    results.push((
        8,
        "conjecture campaign (1e5 pairs x 3 dims + 50-restart search at d=2,3)",
        o,
        conj_time,
        Some(Duration::from_secs(900)),
    ));

    let (o, t) = timed(|| {
        let mixed_1 = mixed_batch(1);
        let mixed_3 = mixed_batch(3);
        let pure_2 = pure_batch(2);
        let conj_2 = conjecture_batch(2);
        let search_1 = conjecture_search(2, 1);
        let search_4 = conjecture_search(2, 4);
        let same = [
            summaries_json(&mixed) == summaries_json(&mixed_1),
            summaries_json(&mixed_1) == summaries_json(&mixed_3),
            summaries_json(&pure) == summaries_json(&pure_2),
            summaries_json(&conj) == summaries_json(&conj_2),
            search_1 == search_4 && search_1 == searches[0],
        ];
        check(
            same.iter().all(|&b| b),
            format!("criteria 3, 4 and 8 rerun with 1-4 workers: identical = {same:?}"),
        )
    });
    results.push((9, "determinism across worker counts", o, t, None));

    let mut all = true;
    for (id, name, outcome, elapsed, limit) in &results {
        let in_time = limit.is_none_or(|l| *elapsed <= l);
        let pass = outcome.pass && in_time;
        all &= pass;
        let limit = limit.map_or_else(String::new, |l| format!(" (limit {:.0?})", l));
        println!(
            "{} [{id}] {name}: {}; runtime {:.2?}{limit}",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
