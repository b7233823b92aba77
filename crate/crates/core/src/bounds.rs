//! Evaluators for the fidelity lower and upper bounds.
//!
//! Every evaluator returns a [`BoundReport`] whose `lhs` is the fidelity side
//! and `rhs` the bounding expression. `gap` is signed so that a nonnegative
//! value means the inequality holds:
//!
//! | bound              | inequality                                   | gap         |
//! |--------------------|----------------------------------------------|-------------|
//! | `fvdg_lower`       | `F >= 1 - T`                                 | `lhs - rhs` |
//! | `fvdg_upper`       | `F <= sqrt(1 - T^2)`                         | `rhs - lhs` |
//! | `thm1_pure_path`   | `sqrt(l + (1-l) r^2) >= 1 - (1 - sqrt l) sqrt(1 - r^2)` | `lhs - rhs` |
//! | `corollary_bures`  | `F(rho, path) >= 1 - (1 - sqrt l) B`         | `lhs - rhs` |
//! | `conjecture_path`  | `F(rho, path) >= 1 - (1 - sqrt l) ||rho - sigma||_1 / 2` | `lhs - rhs` |
//! | `smax_lower`       | `F >= 1 - sqrt(l0)/(sqrt(l0) + 1) ||rho - sigma||_1 / 2` | `lhs - rhs` |
//!
//! where `path = l rho + (1 - l) sigma`. `conjecture_path` is unproven and
//! `smax_lower` is derived from it, so their violations are reported as
//! candidate counterexamples rather than treated as bugs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::metrics::{self, SMaxResult};
use crate::scalar::Real;
use crate::states::{
    check_dims, check_lambda, density_from_matrix_with, mix, DensityMatrix, StateTolerances,
};

/// `|lambda0 - 1|` at or below which `rho` and `sigma` are numerically equal.
pub const DEGENERATE_LAMBDA0_TOL: f64 = 1e-8;
/// Clamp floor for the eigenvalues of the decomposition remainder.
pub const DECOMPOSITION_CLAMP: f64 = 1e-7;
/// Tolerance on `||rho - sigma_hat||_1 (1 - 1/lambda0) = ||rho - sigma||_1`.
pub const TRACE_IDENTITY_TOL: f64 = 1e-7;
/// Maximum reconstruction residual of the decomposition.
pub const DECOMPOSITION_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    FvdgLower,
    FvdgUpper,
    Thm1PurePath,
    CorollaryBures,
    ConjecturePath,
    SmaxLower,
}

impl BoundId {
    pub const ALL: [BoundId; 6] = [
        BoundId::FvdgLower,
        BoundId::FvdgUpper,
        BoundId::Thm1PurePath,
        BoundId::CorollaryBures,
        BoundId::ConjecturePath,
        BoundId::SmaxLower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundId::FvdgLower => "fvdg_lower",
            BoundId::FvdgUpper => "fvdg_upper",
            BoundId::Thm1PurePath => "thm1_pure_path",
            BoundId::CorollaryBures => "corollary_bures",
            BoundId::ConjecturePath => "conjecture_path",
            BoundId::SmaxLower => "smax_lower",
        }
    }

    /// Proved bounds; a violation of one of these is a numerical bug.
    pub fn is_proved(self) -> bool {
        !matches!(self, BoundId::ConjecturePath | BoundId::SmaxLower)
    }

    /// Whether the bound is stated along the path `lambda rho + (1 - lambda) sigma`.
    pub fn uses_lambda(self) -> bool {
        matches!(
            self,
            BoundId::Thm1PurePath | BoundId::CorollaryBures | BoundId::ConjecturePath
        )
    }

    /// `+1` when `gap = lhs - rhs`, `-1` when `gap = rhs - lhs`.
    pub fn orientation(self) -> f64 {
        match self {
            BoundId::FvdgUpper => -1.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown bound {s:?}")))
    }
}

/// Gap tolerances: a report is satisfied when `gap >= -tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Proved mixed-state path bound (`corollary_bures`).
    pub proved: f64,
    /// Closed-form scalar bound (`thm1_pure_path`).
    pub scalar: f64,
    /// Both Fuchs-van de Graaf inequalities.
    pub fvdg: f64,
    /// Unproven bounds: a gap below `-candidate` is a candidate counterexample.
    pub candidate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            proved: 1e-7,
            scalar: 1e-12,
            fvdg: 1e-9,
            candidate: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn for_bound(&self, id: BoundId) -> f64 {
        match id {
            BoundId::FvdgLower | BoundId::FvdgUpper => self.fvdg,
            BoundId::Thm1PurePath => self.scalar,
            BoundId::CorollaryBures => self.proved,
            BoundId::ConjecturePath | BoundId::SmaxLower => self.candidate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("proved", self.proved),
            ("scalar", self.scalar),
            ("fvdg", self.fvdg),
            ("candidate", self.candidate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "tolerance {name} = {v} must be positive"
                )));
            }
        }
        Ok(())
    }
}

/// One evaluated inequality instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BoundReport<T: Real> {
    pub bound_id: BoundId,
    /// Fidelity side.
    pub lhs: T,
    /// Bounding side.
    pub rhs: T,
    /// Signed slack, nonnegative when the inequality holds.
    pub gap: T,
    pub tolerance: T,
    pub satisfied: bool,
    pub lambda: Option<T>,
    pub inputs_digest: String,
}

impl<T: Real> BoundReport<T> {
    pub fn new(
        bound_id: BoundId,
        lhs: T,
        rhs: T,
        lambda: Option<T>,
        tolerances: &Tolerances,
        inputs_digest: String,
    ) -> Self {
        let gap = (lhs - rhs) * T::lit(bound_id.orientation()) + T::zero();
        Self::with_gap(bound_id, lhs, rhs, gap, lambda, tolerances, inputs_digest)
    }

    fn with_gap(
        bound_id: BoundId,
        lhs: T,
        rhs: T,
        gap: T,
        lambda: Option<T>,
        tolerances: &Tolerances,
        inputs_digest: String,
    ) -> Self {
        let tolerance = T::lit(tolerances.for_bound(bound_id));
        Self {
            bound_id,
            lhs,
            rhs,
            gap,
            tolerance,
            satisfied: gap >= -tolerance,
            lambda,
            inputs_digest,
        }
    }

    /// A violated unproven bound.
    pub fn is_candidate_counterexample(&self) -> bool {
        !self.bound_id.is_proved() && !self.satisfied
    }

    /// A violated proved bound.
    pub fn is_proved_violation(&self) -> bool {
        self.bound_id.is_proved() && !self.satisfied
    }
}

fn fnv1a(bytes: impl Iterator<Item = u8>) -> u64 {
    bytes.fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

fn matrix_digest<T: Real>(m: &ComplexMatrix<T>) -> u64 {
    fnv1a(
        m.as_slice()
            .iter()
            .flat_map(|z| [z.re.as_f64().to_bits(), z.im.as_f64().to_bits()])
            .flat_map(u64::to_le_bytes),
    )
}

/// Short provenance string identifying the exact inputs of a report.
pub fn inputs_digest<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
    lambda: Option<T>,
) -> String {
    let base = format!(
        "d={} rho#{:016x} sigma#{:016x}",
        rho.dim(),
        matrix_digest(rho.matrix()),
        matrix_digest(sigma.matrix())
    );
    match lambda {
        Some(l) => format!("{base} lambda={l}"),
        None => base,
    }
}

/// Fuchs-van de Graaf sandwich `1 - T <= F <= sqrt(1 - T^2)` as (lower, upper) reports.
pub fn fvdg<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
    tol: &Tolerances,
) -> Result<(BoundReport<T>, BoundReport<T>)> {
    check_dims(rho, sigma)?;
    let f = metrics::fidelity(rho, sigma)?;
    let t = metrics::trace_distance(rho, sigma)?;
    Ok(fvdg_from_values(f, t, tol, inputs_digest(rho, sigma, None)))
}

pub(crate) fn fvdg_from_values<T: Real>(
    f: T,
    t: T,
    tol: &Tolerances,
    digest: String,
) -> (BoundReport<T>, BoundReport<T>) {
    let lower = BoundReport::new(
        BoundId::FvdgLower,
        f,
        T::one() - t,
        None,
        tol,
        digest.clone(),
    );
    let upper_rhs = (T::one() - t * t).max(T::zero()).sqrt();
    let upper = BoundReport::new(BoundId::FvdgUpper, f, upper_rhs, None, tol, digest);
    (lower, upper)
}

fn check_scalar(name: &'static str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange { name, value: x });
    }
    Ok(())
}

/// Pure-state path bound in closed form:
/// `sqrt(lambda + (1 - lambda) r^2) >= 1 - (1 - sqrt(lambda)) sqrt(1 - r^2)`.
pub fn thm1_bound<T: Real>(r: T, lambda: T, tol: &Tolerances) -> Result<BoundReport<T>> {
    check_scalar("r", r.as_f64())?;
    check_scalar("lambda", lambda.as_f64())?;
    let lhs = metrics::fidelity_pure_path(r, lambda)?;
    let rhs = T::one() - (T::one() - lambda.sqrt()) * (T::one() - r * r).sqrt();
    Ok(BoundReport::new(
        BoundId::Thm1PurePath,
        lhs,
        rhs,
        Some(lambda),
        tol,
        format!("pure overlap r={r}"),
    ))
}

/// Difference of squares of the two sides of [`thm1_bound`] in factored form,
/// `2 (1 - sqrt(lambda)) (sqrt(1 - r^2) - (1 - r^2))`.
pub fn thm1_gap_f<T: Real>(lambda: T, r: T) -> Result<T> {
    check_scalar("lambda", lambda.as_f64())?;
    check_scalar("r", r.as_f64())?;
    let s = T::one() - r * r;
    Ok(T::lit(2.0) * (T::one() - lambda.sqrt()) * (s.sqrt() - s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathVariant {
    /// `1 - (1 - sqrt l) ||rho - sigma||_1 / 2` (unproven for mixed states).
    ConjectureTracenorm,
    /// `1 - (1 - sqrt l) B(rho, sigma)` (proved).
    CorollaryBures,
}

impl PathVariant {
    pub fn bound_id(self) -> BoundId {
        match self {
            PathVariant::ConjectureTracenorm => BoundId::ConjecturePath,
            PathVariant::CorollaryBures => BoundId::CorollaryBures,
        }
    }
}

/// A pair `(rho, sigma)` with the lambda-independent pieces of the path bounds
/// precomputed, for evaluating many points along the path.
#[derive(Debug, Clone)]
pub struct PathPair<T: Real> {
    rho: DensityMatrix<T>,
    sigma: DensityMatrix<T>,
    sqrt_rho: ComplexMatrix<T>,
    fidelity: T,
    trace_norm: T,
    bures: T,
    digest: String,
}

impl<T: Real> PathPair<T> {
    pub fn new(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<Self> {
        check_dims(rho, sigma)?;
        let sqrt_rho = linalg::psd_sqrt(rho.matrix())?;
        let sqrt_sigma = linalg::psd_sqrt(sigma.matrix())?;
        let f = metrics::reconcile_fidelity(metrics::fidelity_routes_from_roots(
            &sqrt_rho,
            sigma,
            &sqrt_sigma,
        )?)?;
        Ok(Self {
            rho: rho.clone(),
            sigma: sigma.clone(),
            sqrt_rho,
            fidelity: f,
            trace_norm: metrics::trace_norm_distance(rho, sigma)?,
            bures: metrics::bures_from_fidelity(f),
            digest: inputs_digest(rho, sigma, None),
        })
    }

    pub fn fidelity(&self) -> T {
        self.fidelity
    }

    pub fn trace_norm(&self) -> T {
        self.trace_norm
    }

    pub fn bures(&self) -> T {
        self.bures
    }

    /// [`fvdg`] from the cached fidelity and trace norm.
    pub fn fvdg(&self, tol: &Tolerances) -> (BoundReport<T>, BoundReport<T>) {
        fvdg_from_values(
            self.fidelity,
            self.trace_norm * T::lit(0.5),
            tol,
            self.digest.clone(),
        )
    }

    /// [`smax_bound`] from the cached fidelity and trace norm.
    pub fn smax_bound(&self, tol: &Tolerances) -> Result<BoundReport<T>> {
        let s = metrics::smax(&self.rho, &self.sigma)?;
        Ok(smax_bound_from_values(
            self.fidelity,
            self.trace_norm,
            &s,
            tol,
            self.digest.clone(),
        ))
    }

    /// `F(rho, lambda rho + (1 - lambda) sigma)`
    pub fn path_fidelity(&self, lambda: T) -> Result<T> {
        let path = mix(&self.rho, &self.sigma, lambda)?;
        let sqrt_path = linalg::psd_sqrt(path.matrix())?;
        metrics::reconcile_fidelity(metrics::fidelity_routes_from_roots(
            &self.sqrt_rho,
            &path,
            &sqrt_path,
        )?)
    }

    pub fn rhs(&self, lambda: T, variant: PathVariant) -> T {
        let slack = T::one() - lambda.sqrt();
        match variant {
            PathVariant::ConjectureTracenorm => T::one() - slack * self.trace_norm * T::lit(0.5),
            PathVariant::CorollaryBures => T::one() - slack * self.bures,
        }
    }

    pub fn check(
        &self,
        lambda: T,
        variant: PathVariant,
        tol: &Tolerances,
    ) -> Result<BoundReport<T>> {
        check_lambda(lambda)?;
        let lhs = self.path_fidelity(lambda)?;
        Ok(BoundReport::new(
            variant.bound_id(),
            lhs,
            self.rhs(lambda, variant),
            Some(lambda),
            tol,
            format!("{} lambda={lambda}", self.digest),
        ))
    }

    /// Both variants at one `lambda`, sharing the path fidelity.
    pub fn check_both(&self, lambda: T, tol: &Tolerances) -> Result<[BoundReport<T>; 2]> {
        check_lambda(lambda)?;
        let lhs = self.path_fidelity(lambda)?;
        let digest = format!("{} lambda={lambda}", self.digest);
        Ok([
            PathVariant::CorollaryBures,
            PathVariant::ConjectureTracenorm,
        ]
        .map(|v| {
            BoundReport::new(
                v.bound_id(),
                lhs,
                self.rhs(lambda, v),
                Some(lambda),
                tol,
                digest.clone(),
            )
        }))
    }
}

/// Path bound `F(rho, lambda rho + (1 - lambda) sigma) >= rhs` for mixed states.
pub fn path_bound_check<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
    lambda: T,
    variant: PathVariant,
    tol: &Tolerances,
) -> Result<BoundReport<T>> {
    check_dims(rho, sigma)?;
    check_lambda(lambda)?;
    PathPair::new(rho, sigma)?.check(lambda, variant, tol)
}

/// `sigma = rho / lambda0 + (1 - 1/lambda0) sigma_hat`.
#[derive(Debug, Clone)]
pub struct Decomposition<T: Real> {
    pub lambda0: T,
    pub sigma_hat: DensityMatrix<T>,
    /// Max-entry norm of `rho / lambda0 + (1 - 1/lambda0) sigma_hat - sigma`.
    pub residual: T,
    /// Smallest eigenvalue of `sigma_hat` before clamping.
    pub min_eigenvalue: T,
    /// `| ||rho - sigma_hat||_1 (1 - 1/lambda0) - ||rho - sigma||_1 |`
    pub trace_identity_error: T,
}

pub fn decompose<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
) -> Result<Decomposition<T>> {
    check_dims(rho, sigma)?;
    let s = metrics::smax(rho, sigma)?;
    decompose_with_smax(rho, sigma, &s)
}

pub fn decompose_with_smax<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
    s: &SMaxResult<T>,
) -> Result<Decomposition<T>> {
    if !s.is_finite() {
        return Err(Error::InfiniteLambda0);
    }
    let lambda0 = s.lambda0;
    if (lambda0 - T::one()).abs() <= T::lit(DEGENERATE_LAMBDA0_TOL) {
        return Err(Error::DegenerateDecomposition {
            lambda0: lambda0.as_f64(),
        });
    }
    let inv = T::one() / lambda0;
    let weight = T::one() - inv;
    let raw = (sigma.matrix() - &rho.matrix().scale(inv)).scale(T::one() / weight);
    let min_eigenvalue = linalg::min_eigenvalue(&raw.symmetrized())?;
    let clamp = StateTolerances {
        psd_floor: DECOMPOSITION_CLAMP,
        ..StateTolerances::default()
    };
    let sigma_hat = density_from_matrix_with(raw, &clamp)?;
    let rebuilt = &rho.matrix().scale(inv) + &sigma_hat.matrix().scale(weight);
    let residual = rebuilt.max_abs_diff(sigma.matrix());
    if residual > T::lit(DECOMPOSITION_RESIDUAL_TOL) {
        return Err(Error::NumericalFailure(format!(
            "decomposition residual {residual:e} exceeds {DECOMPOSITION_RESIDUAL_TOL:e}"
        )));
    }
    let lhs = metrics::trace_norm_distance(rho, &sigma_hat)? * weight;
    let trace_identity_error = (lhs - metrics::trace_norm_distance(rho, sigma)?).abs();
    if trace_identity_error > T::lit(TRACE_IDENTITY_TOL) {
        return Err(Error::NumericalFailure(format!(
            "trace-norm identity off by {trace_identity_error:e}"
        )));
    }
    Ok(Decomposition {
        lambda0,
        sigma_hat,
        residual,
        min_eigenvalue,
        trace_identity_error,
    })
}

/// State-dependent factor `sqrt(l0) / (sqrt(l0) + 1)`; tends to 1 as `l0 -> inf`.
pub fn smax_factor<T: Real>(lambda0: T) -> T {
    if lambda0.is_infinite() {
        return T::one();
    }
    let r = lambda0.sqrt();
    r / (r + T::one())
}

/// `F >= 1 - sqrt(l0)/(sqrt(l0) + 1) ||rho - sigma||_1 / 2`, reducing to the
/// Fuchs-van de Graaf lower bound when `l0 = +inf`.
pub fn smax_bound<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
    tol: &Tolerances,
) -> Result<BoundReport<T>> {
    check_dims(rho, sigma)?;
    let s = metrics::smax(rho, sigma)?;
    let f = metrics::fidelity(rho, sigma)?;
    let norm = metrics::trace_norm_distance(rho, sigma)?;
    Ok(smax_bound_from_values(
        f,
        norm,
        &s,
        tol,
        inputs_digest(rho, sigma, None),
    ))
}

pub(crate) fn smax_bound_from_values<T: Real>(
    f: T,
    trace_norm: T,
    s: &SMaxResult<T>,
    tol: &Tolerances,
    digest: String,
) -> BoundReport<T> {
    let rhs = T::one() - T::lit(0.5) * smax_factor(s.lambda0) * trace_norm;
    if s.is_finite() && (s.lambda0 - T::one()).abs() <= T::lit(DEGENERATE_LAMBDA0_TOL) {
        return BoundReport::with_gap(
            BoundId::SmaxLower,
            T::one(),
            rhs,
            T::one() - rhs,
            None,
            tol,
            digest,
        );
    }
    BoundReport::new(BoundId::SmaxLower, f, rhs, None, tol, digest)
}

/// Numerically pure: largest eigenvalue within `1e-8` of one.
pub fn is_pure<T: Real>(rho: &DensityMatrix<T>) -> Result<bool> {
    Ok(linalg::max_eigenvalue(rho.matrix())? >= T::one() - T::lit(1e-8))
}
