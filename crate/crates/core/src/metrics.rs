//! Distance measures between density matrices.
//!
//! Bures distance here is `sqrt(1 - F^2)`, not the more common
//! `sqrt(2 (1 - F))`; the path bounds in [`crate::bounds`] are stated in
//! terms of the former.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::scalar::Real;
use crate::states::{check_dims, DensityMatrix};

/// The two fidelity evaluations must agree to this absolute tolerance.
pub const FIDELITY_AGREEMENT_TOL: f64 = 1e-8;
/// Largest raw fidelity accepted before clamping to 1.
pub const FIDELITY_OVERSHOOT_TOL: f64 = 1e-9;
/// Weight of `rho` outside the support of `sigma` above which `lambda0 = +inf`.
pub const SUPPORT_TOL: f64 = 1e-8;

fn clamp_unit<T: Real>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

/// `sum_i sqrt(lambda_i)` over the eigenvalues of a PSD matrix, ignoring
/// eigenvalues at the rounding-noise level.
fn trace_sqrt<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    let e = linalg::eigh(&a.symmetrized())?;
    let noise = T::lit(8.0) * T::epsilon() * T::from_usize_lossy(a.dim()) * e.spectral_radius();
    Ok(e.eigenvalues
        .iter()
        .filter(|&&l| l > noise)
        .fold(T::zero(), |acc, &l| acc + l.sqrt()))
}

/// Raw fidelity from both routes: `Tr sqrt(sqrt(rho) sigma sqrt(rho))` and the
/// nuclear norm of `sqrt(sigma) sqrt(rho)`.
pub fn fidelity_routes<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
) -> Result<(T, T)> {
    check_dims(rho, sigma)?;
    let sqrt_rho = linalg::psd_sqrt(rho.matrix())?;
    let sqrt_sigma = linalg::psd_sqrt(sigma.matrix())?;
    fidelity_routes_from_roots(&sqrt_rho, sigma, &sqrt_sigma)
}

pub(crate) fn fidelity_routes_from_roots<T: Real>(
    sqrt_rho: &ComplexMatrix<T>,
    sigma: &DensityMatrix<T>,
    sqrt_sigma: &ComplexMatrix<T>,
) -> Result<(T, T)> {
    let inner = &(sqrt_rho * sigma.matrix()) * sqrt_rho;
    let spectral = trace_sqrt(&inner)?;
    let nuclear = linalg::svd(&(sqrt_sigma * sqrt_rho))?.nuclear_norm();
    Ok((spectral, nuclear))
}

pub(crate) fn reconcile_fidelity<T: Real>((spectral, nuclear): (T, T)) -> Result<T> {
    if (spectral - nuclear).abs() > T::lit(FIDELITY_AGREEMENT_TOL) {
        return Err(Error::NumericalFailure(format!(
            "fidelity routes disagree: {spectral} vs {nuclear}"
        )));
    }
    if spectral > T::one() + T::lit(FIDELITY_OVERSHOOT_TOL) {
        return Err(Error::NumericalFailure(format!(
            "fidelity {spectral} exceeds 1"
        )));
    }
    Ok(clamp_unit(spectral))
}

/// Uhlmann fidelity `F(rho, sigma) = Tr sqrt(sqrt(rho) sigma sqrt(rho))`, in `[0, 1]`.
///
/// Cross-checked against the nuclear norm of `sqrt(sigma) sqrt(rho)`; a
/// disagreement beyond [`FIDELITY_AGREEMENT_TOL`] is a `NumericalFailure`.
pub fn fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    reconcile_fidelity(fidelity_routes(rho, sigma)?)
}

fn check_unit(name: &'static str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange { name, value: x });
    }
    Ok(())
}

/// Fidelity between a pure state and its mixture with another pure state of
/// overlap `r`: `sqrt(lambda + (1 - lambda) r^2)`.
pub fn fidelity_pure_path<T: Real>(r: T, lambda: T) -> Result<T> {
    check_unit("r", r.as_f64())?;
    check_unit("lambda", lambda.as_f64())?;
    Ok((lambda + (T::one() - lambda) * r * r).sqrt())
}

/// `||rho - sigma||_1`
pub fn trace_norm_distance<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    check_dims(rho, sigma)?;
    linalg::trace_norm(&(rho.matrix() - sigma.matrix()))
}

/// `T = ||rho - sigma||_1 / 2`, in `[0, 1]`.
pub fn trace_distance<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    Ok(clamp_unit(trace_norm_distance(rho, sigma)? * T::lit(0.5)))
}

/// `B(rho, sigma) = sqrt(1 - F^2)`.
pub fn bures_distance<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    Ok(bures_from_fidelity(fidelity(rho, sigma)?))
}

/// `sqrt(1 - F^2)`; fidelities within a few ulps of one map to zero, since the
/// square root would otherwise turn rounding error `e` into `sqrt(2 e)`.
pub fn bures_from_fidelity<T: Real>(f: T) -> T {
    let f = clamp_unit(f);
    if T::one() - f <= T::lit(64.0) * T::epsilon() {
        return T::zero();
    }
    (T::one() - f * f).max(T::zero()).sqrt()
}

/// Max-relative entropy `S_max(rho || sigma) = ln lambda0` with
/// `lambda0 = lambda_max(sigma^{-1/2} rho sigma^{-1/2})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SMaxResult<T: Real> {
    /// `+inf` when the support of `rho` leaves the support of `sigma`.
    pub lambda0: T,
    pub smax: T,
    /// `|| (I - P) rho (I - P) ||_1` with `P` the support projector of `sigma`.
    pub support_violation: T,
    /// Max-entry norm of `rho sigma`; zero exactly when the states are orthogonal.
    pub product_norm: T,
}

impl<T: Real> SMaxResult<T> {
    pub fn is_finite(&self) -> bool {
        self.lambda0.is_finite()
    }

    /// `rho sigma = 0` and support containment disagree about whether `lambda0` is infinite.
    ///
    /// Orthogonality implies the support violation, not conversely: a pair with
    /// overlapping but non-nested supports is flagged here.
    pub fn conditions_disagree(&self) -> bool {
        let orthogonal = self.product_norm <= T::lit(SUPPORT_TOL);
        orthogonal != !self.is_finite()
    }
}

pub fn smax<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<SMaxResult<T>> {
    smax_with(rho, sigma, None, T::lit(SUPPORT_TOL))
}

/// [`smax`] with an explicit rank tolerance for `sigma` and support-violation threshold.
pub fn smax_with<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
    rank_tol: Option<T>,
    support_tol: T,
) -> Result<SMaxResult<T>> {
    check_dims(rho, sigma)?;
    let (inv_sqrt, projector) = linalg::pinv_sqrt(sigma.matrix(), rank_tol)?;
    let complement = &ComplexMatrix::identity(rho.dim()) - &projector;
    let outside = &(&complement * rho.matrix()) * &complement;
    let support_violation = linalg::trace_norm(&outside.symmetrized())?;
    let product_norm = (rho.matrix() * sigma.matrix()).max_abs();
    if support_violation > support_tol {
        return Ok(SMaxResult {
            lambda0: T::infinity(),
            smax: T::infinity(),
            support_violation,
            product_norm,
        });
    }
    let conjugated = &(&inv_sqrt * rho.matrix()) * &inv_sqrt;
    let lambda0 = linalg::max_eigenvalue(&conjugated.symmetrized())?;
    Ok(SMaxResult {
        lambda0,
        smax: lambda0.ln(),
        support_violation,
        product_norm,
    })
}
