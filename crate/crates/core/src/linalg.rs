//! Dense complex Hermitian linear algebra.
//!
//! Everything here is built on two Jacobi kernels: a cyclic two-sided sweep for
//! Hermitian eigendecomposition and a one-sided (Hestenes) sweep for the
//! singular value decomposition. Matrix functions (square root, inverse square
//! root on the support) are spectral maps over [`eigh`]. Dimensions are expected
//! to stay in the tens, where Jacobi is accurate and fast enough.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Max-entry asymmetry tolerated before a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Eigenvalues in `[-PSD_FLOOR, 0)` are rounding noise and clamped to zero.
pub const PSD_FLOOR: f64 = 1e-9;
/// Default relative rank tolerance: eigenvalues below `RANK_REL_TOL * lambda_max * d` are null.
pub const RANK_REL_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 64;

/// Dense square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T: Real> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(x, T::zero());
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from rows, rejecting ragged, empty or non-finite input.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidState("matrix has no rows".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidState(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        let m = Self { dim, data };
        if !m.is_finite() {
            return Err(Error::InvalidState("matrix has non-finite entries".into()));
        }
        Ok(m)
    }

    /// `|u><v|`
    pub fn outer(u: &[Complex<T>], v: &[Complex<T>]) -> Self {
        debug_assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex<T>]> {
        self.data.chunks(self.dim.max(1))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.scale(s)).collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Max-entry norm of `A - A^dagger`.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(A + A^dagger) / 2`, with an exactly real diagonal.
    pub fn symmetrized(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.dim, |i, j| {
            if i == j {
                Complex::new(self[(i, i)].re, T::zero())
            } else {
                (self[(i, j)] + self[(j, i)].conj()).scale(half)
            }
        })
    }

    /// `U A U^dagger`
    pub fn conjugated_by(&self, u: &Self) -> Self {
        &(u * self) * &u.adjoint()
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        self.rows()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(Complex::zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    /// Max-entry distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    /// Lossless conversion between scalar types where representable.
    pub fn cast<U: Real>(&self) -> ComplexMatrix<U> {
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64())))
                .collect(),
        }
    }
}

impl<T: Real> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<'a, T: Real> Mul<&'a ComplexMatrix<T>> for &'a ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: &'a ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                let out_row = &mut out.data[i * n..(i + 1) * n];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o = *o + a * *b;
                }
            }
        }
        out
    }
}

impl<'a, T: Real> Add<&'a ComplexMatrix<T>> for &'a ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: &'a ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<'a, T: Real> Sub<&'a ComplexMatrix<T>> for &'a ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: &'a ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Eigendecomposition `A = V diag(eigenvalues) V^dagger` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Unitary; column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// `V diag(f(lambda)) V^dagger`
    pub fn map(&self, mut f: impl FnMut(T) -> T) -> ComplexMatrix<T> {
        let n = self.eigenvectors.dim();
        let mapped: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n);
        for (k, &w) in mapped.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)].scale(w);
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.map(|l| l)
    }

    pub fn min(&self) -> T {
        self.eigenvalues.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.eigenvalues.last().copied().unwrap_or_else(T::zero)
    }

    /// Largest eigenvalue magnitude; the natural scale for noise thresholds.
    pub fn spectral_radius(&self) -> T {
        self.min().abs().max(self.max().abs())
    }
}

/// Parameters of the unitary `J` with `J_pp = c`, `J_pq = s`, `J_qp = -s*ph`,
/// `J_qq = c*ph` that annihilates entry `(p, q)` of the Hermitian 2x2 block
/// `[[app, apq], [conj(apq), aqq]]` under `J^dagger A J`.
#[derive(Debug, Clone, Copy)]
struct Rotation<T: Real> {
    c: T,
    s: T,
    ph: Complex<T>,
    t: T,
    abs_apq: T,
}

fn rotation<T: Real>(app: T, aqq: T, apq: Complex<T>) -> Rotation<T> {
    let abs_apq = apq.norm();
    let ph = apq.conj().unscale(abs_apq);
    let theta = (aqq - app) / (abs_apq + abs_apq);
    let t = if theta.is_infinite() {
        T::lit(0.5) / theta
    } else {
        let denom = theta.abs() + (theta * theta + T::one()).sqrt();
        if theta < T::zero() {
            -T::one() / denom
        } else {
            T::one() / denom
        }
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    Rotation {
        c,
        s: t * c,
        ph,
        t,
        abs_apq,
    }
}

/// Right-multiplies columns `p`, `q` of `m` by the rotation.
fn rotate_columns<T: Real>(m: &mut ComplexMatrix<T>, p: usize, q: usize, r: &Rotation<T>) {
    for k in 0..m.dim() {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp.scale(r.c) - (r.ph * mkq).scale(r.s);
        m[(k, q)] = mkp.scale(r.s) + (r.ph * mkq).scale(r.c);
    }
}

/// Left-multiplies rows `p`, `q` of `m` by the adjoint rotation.
fn rotate_rows<T: Real>(m: &mut ComplexMatrix<T>, p: usize, q: usize, r: &Rotation<T>) {
    let phc = r.ph.conj();
    for k in 0..m.dim() {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = mpk.scale(r.c) - (phc * mqk).scale(r.s);
        m[(q, k)] = mpk.scale(r.s) + (phc * mqk).scale(r.c);
    }
}

/// Hermitian eigendecomposition with eigenvalues ascending.
///
/// The input is symmetrized as `(A + A^dagger)/2` after checking that its
/// asymmetry is within [`HERMITIAN_TOL`].
pub fn eigh<T: Real>(a: &ComplexMatrix<T>) -> Result<HermitianEigen<T>> {
    eigh_with_tol(a, T::lit(HERMITIAN_TOL))
}

pub fn eigh_with_tol<T: Real>(a: &ComplexMatrix<T>, hermitian_tol: T) -> Result<HermitianEigen<T>> {
    if !a.is_finite() {
        return Err(Error::NumericalFailure("non-finite matrix entry".into()));
    }
    let defect = a.hermitian_defect();
    if defect > hermitian_tol {
        return Err(Error::NonHermitian {
            asymmetry: defect.as_f64(),
        });
    }
    let mut m = a.symmetrized();
    let n = m.dim();
    let mut v = ComplexMatrix::identity(n);
    let eps = T::epsilon();
    let floor = m.frobenius_norm() * eps * eps;

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let abs_apq = apq.norm();
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                if abs_apq <= floor || abs_apq <= eps * (app * aqq).abs().sqrt() {
                    continue;
                }
                rotated = true;
                let r = rotation(app, aqq, apq);
                rotate_columns(&mut m, p, q, &r);
                rotate_rows(&mut m, p, q, &r);
                m[(p, q)] = Complex::zero();
                m[(q, p)] = Complex::zero();
                m[(p, p)] = Complex::new(app - r.t * r.abs_apq, T::zero());
                m[(q, q)] = Complex::new(aqq + r.t * r.abs_apq, T::zero());
                rotate_columns(&mut v, p, q, &r);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.partial_cmp(&m[(j, j)].re).expect("finite"));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues at or below this magnitude are indistinguishable from zero for
/// a matrix with the given spectral radius.
fn noise_floor<T: Real>(e: &HermitianEigen<T>) -> T {
    T::lit(8.0) * T::epsilon() * T::from_usize_lossy(e.eigenvalues.len()) * e.spectral_radius()
}

fn check_psd<T: Real>(e: &HermitianEigen<T>, floor: T) -> Result<()> {
    if e.min() < -floor {
        return Err(Error::NotPsd {
            min_eigenvalue: e.min().as_f64(),
        });
    }
    Ok(())
}

/// Principal square root of a PSD matrix.
///
/// Eigenvalues in `[-PSD_FLOOR, 0)` are clamped to zero, and eigenvalues at
/// the rounding-noise level of the spectrum are treated as exact zeros so that
/// projectors map to themselves.
pub fn psd_sqrt<T: Real>(a: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let e = eigh(a)?;
    check_psd(&e, T::lit(PSD_FLOOR))?;
    Ok(sqrt_from_eigen(&e))
}

pub(crate) fn sqrt_from_eigen<T: Real>(e: &HermitianEigen<T>) -> ComplexMatrix<T> {
    let noise = noise_floor(e);
    e.map(|l| if l <= noise { T::zero() } else { l.sqrt() })
}

/// Inverse square root restricted to the support, together with the
/// orthogonal projector onto that support.
///
/// `rank_tol` defaults to `RANK_REL_TOL * lambda_max * d`; eigenvalues at or
/// below it are excluded from the inversion.
pub fn pinv_sqrt<T: Real>(
    a: &ComplexMatrix<T>,
    rank_tol: Option<T>,
) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    let e = eigh(a)?;
    check_psd(&e, T::lit(PSD_FLOOR))?;
    let tol = rank_tol.unwrap_or_else(|| default_rank_tol(&e));
    let inv_sqrt = e.map(|l| {
        if l > tol {
            T::one() / l.sqrt()
        } else {
            T::zero()
        }
    });
    let projector = e.map(|l| if l > tol { T::one() } else { T::zero() });
    Ok((inv_sqrt, projector))
}

pub(crate) fn default_rank_tol<T: Real>(e: &HermitianEigen<T>) -> T {
    T::lit(RANK_REL_TOL) * e.max().max(T::zero()) * T::from_usize_lossy(e.eigenvalues.len())
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    let e = eigh(a)?;
    Ok(e.eigenvalues.iter().fold(T::zero(), |acc, l| acc + l.abs()))
}

pub fn max_eigenvalue<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    Ok(eigh(a)?.max())
}

pub fn min_eigenvalue<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    Ok(eigh(a)?.min())
}

/// Singular value decomposition `M = U diag(s) V^dagger`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd<T: Real> {
    pub u: ComplexMatrix<T>,
    pub singular_values: Vec<T>,
    pub v: ComplexMatrix<T>,
}

impl<T: Real> Svd<T> {
    /// Unitary factor `U V^dagger` of the polar decomposition `M = (U V^dagger)(V S V^dagger)`.
    pub fn polar_unitary(&self) -> ComplexMatrix<T> {
        &self.u * &self.v.adjoint()
    }

    pub fn nuclear_norm(&self) -> T {
        self.singular_values
            .iter()
            .fold(T::zero(), |acc, &s| acc + s)
    }
}

/// One-sided Jacobi SVD of a general square matrix.
///
/// Left singular vectors for numerically zero singular values are completed
/// deterministically by Gram-Schmidt over the standard basis, so `U` is always
/// unitary.
pub fn svd<T: Real>(m: &ComplexMatrix<T>) -> Result<Svd<T>> {
    if !m.is_finite() {
        return Err(Error::NumericalFailure("non-finite matrix entry".into()));
    }
    let n = m.dim();
    let mut w = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let eps = T::epsilon();
    let floor = m.frobenius_norm() * m.frobenius_norm() * eps * eps;
    let orth_tol = T::lit(4.0) * T::from_usize_lossy(n) * eps;

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), Complex::zero());
                for k in 0..n {
                    let wp = w[(k, p)];
                    let wq = w[(k, q)];
                    alpha = alpha + wp.norm_sqr();
                    beta = beta + wq.norm_sqr();
                    gamma = gamma + wp.conj() * wq;
                }
                let abs_gamma = gamma.norm();
                if abs_gamma <= floor || abs_gamma <= orth_tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let r = rotation(alpha, beta, gamma);
                rotate_columns(&mut w, p, q, &r);
                rotate_columns(&mut v, p, q, &r);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let norms: Vec<T> = (0..n)
        .map(|j| {
            (0..n)
                .fold(T::zero(), |acc, i| acc + w[(i, j)].norm_sqr())
                .sqrt()
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).expect("finite"));
    let s_max = order.first().map(|&j| norms[j]).unwrap_or_else(T::zero);
    let null_tol = T::lit(8.0) * eps * T::from_usize_lossy(n) * s_max;

    let singular_values: Vec<T> = order.iter().map(|&j| norms[j]).collect();
    let v_sorted = ComplexMatrix::from_fn(n, |i, k| v[(i, order[k])]);

    let mut u_cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(n);
    for &j in &order {
        if norms[j] > null_tol && norms[j] > T::zero() {
            u_cols.push((0..n).map(|i| w[(i, j)].unscale(norms[j])).collect());
        }
    }
    let rank = u_cols.len();
    let mut basis = 0;
    while u_cols.len() < n && basis < n {
        let mut cand: Vec<Complex<T>> = (0..n)
            .map(|i| {
                if i == basis {
                    Complex::one()
                } else {
                    Complex::zero()
                }
            })
            .collect();
        // Two passes of Gram-Schmidt keep the completion orthogonal to working precision.
        for _ in 0..2 {
            for col in &u_cols {
                let proj = col
                    .iter()
                    .zip(&cand)
                    .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * *b);
                for (c, a) in cand.iter_mut().zip(col) {
                    *c = *c - *a * proj;
                }
            }
        }
        let norm = cand
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt();
        if norm > T::lit(0.5) {
            u_cols.push(cand.into_iter().map(|z| z.unscale(norm)).collect());
        }
        basis += 1;
    }
    if u_cols.len() != n {
        return Err(Error::NumericalFailure(format!(
            "could not complete left singular basis (rank {rank})"
        )));
    }
    let u = ComplexMatrix::from_fn(n, |i, k| u_cols[k][i]);
    Ok(Svd {
        u,
        singular_values,
        v: v_sorted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = ComplexMatrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> M {
        M::from_fn(d, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> M {
        random_matrix(rng, d).symmetrized()
    }

    fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> M {
        let h = random_hermitian(rng, d);
        eigh(&h).unwrap().eigenvectors
    }

    fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex<f64>> {
        let v: Vec<_> = (0..d)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|z| z / n).collect()
    }

    #[test]
    fn eigh_identity_and_diagonal() {
        let e = eigh(&M::identity(2)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);

        let e = eigh(&M::from_diag(&[3.0, -1.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![-1.0, 3.0]);
    }

    #[test]
    fn eigh_pauli_x() {
        let x = M::from_rows(vec![vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]).unwrap();
        let e = eigh(&x).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = M::from_rows(vec![vec![c(0., 0.), c(1., 0.)], vec![c(0., 0.), c(0., 0.)]]).unwrap();
        assert!(matches!(eigh(&m), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [1, 2, 3, 5, 8, 16] {
            for _ in 0..20 {
                let a = random_hermitian(&mut rng, d);
                let e = eigh(&a).unwrap();
                let tol = 1e-10 * d as f64;
                assert!(e.reconstruct().max_abs_diff(&a) < tol);
                let vhv = &e.eigenvectors.adjoint() * &e.eigenvectors;
                assert!(vhv.max_abs_diff(&M::identity(d)) < tol);
                assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn psd_sqrt_examples() {
        assert!(
            psd_sqrt(&M::identity(3))
                .unwrap()
                .max_abs_diff(&M::identity(3))
                < 1e-15
        );
        let s = psd_sqrt(&M::from_diag(&[4.0, 9.0])).unwrap();
        assert!(s.max_abs_diff(&M::from_diag(&[2.0, 3.0])) < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2, 3, 4, 8] {
            let psi = random_unit(&mut rng, d);
            let p = M::outer(&psi, &psi);
            let s = psd_sqrt(&p).unwrap();
            assert!(s.max_abs_diff(&p) < 1e-12, "d={d}: {}", s.max_abs_diff(&p));
        }
    }

    #[test]
    fn psd_sqrt_rejects_negative() {
        let r = psd_sqrt(&M::from_diag(&[1.0, -1e-6]));
        assert!(matches!(r, Err(Error::NotPsd { .. })));
        // within the clamp floor
        let s = psd_sqrt(&M::from_diag(&[1.0, -1e-10])).unwrap();
        assert_eq!(s[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2, 3, 4, 8] {
            for _ in 0..20 {
                let g = random_matrix(&mut rng, d);
                let a = &g * &g.adjoint();
                let s = psd_sqrt(&a).unwrap();
                assert!(s.hermitian_defect() < 1e-12);
                assert!((&s * &s).max_abs_diff(&a) < 1e-8 * d as f64);
            }
        }
    }

    #[test]
    fn pinv_sqrt_examples() {
        let (inv, p) = pinv_sqrt(&M::identity(3), None).unwrap();
        assert!(inv.max_abs_diff(&M::identity(3)) < 1e-15);
        assert!(p.max_abs_diff(&M::identity(3)) < 1e-15);

        let (inv, p) = pinv_sqrt(&M::from_diag(&[4.0, 0.0]), None).unwrap();
        assert!(inv.max_abs_diff(&M::from_diag(&[0.5, 0.0])) < 1e-15);
        assert!(p.max_abs_diff(&M::from_diag(&[1.0, 0.0])) < 1e-15);

        let (inv, p) = pinv_sqrt(&M::from_diag(&[1e-30, 1.0]), None).unwrap();
        assert!(inv.max_abs_diff(&M::from_diag(&[0.0, 1.0])) < 1e-15);
        assert!(p.max_abs_diff(&M::from_diag(&[0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn pinv_sqrt_on_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [2, 3, 4, 8] {
            for rank in 1..=d {
                let g = M::from_fn(d, |_, j| {
                    if j < rank {
                        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    } else {
                        c(0.0, 0.0)
                    }
                });
                let a = &g * &g.adjoint();
                let (inv, p) = pinv_sqrt(&a, None).unwrap();
                let tol = 1e-8 * d as f64;
                assert!((&(&p * &a) * &p).max_abs_diff(&a) < tol);
                assert!((&(&inv * &a) * &inv).max_abs_diff(&p) < tol);
                let tr = p.trace().re;
                assert!((tr - rank as f64).abs() < 1e-9, "rank {rank}, trace {tr}");
            }
        }
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&M::zeros(3)).unwrap(), 0.0);
        assert!((trace_norm(&M::from_diag(&[1.0, -1.0])).unwrap() - 2.0).abs() < 1e-15);
        // orthogonal pure states
        let rho = M::from_diag(&[1.0, 0.0]);
        let sigma = M::from_diag(&[0.0, 1.0]);
        assert!((trace_norm(&(&rho - &sigma)).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn trace_norm_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for d in [2, 3, 4, 8] {
            for _ in 0..10 {
                let a = random_hermitian(&mut rng, d);
                let u = random_unitary(&mut rng, d);
                let b = a.conjugated_by(&u).symmetrized();
                let (na, nb) = (trace_norm(&a).unwrap(), trace_norm(&b).unwrap());
                assert!((na - nb).abs() < 1e-10 * d as f64);
            }
        }
    }

    #[test]
    fn max_eigenvalue_examples() {
        assert_eq!(max_eigenvalue(&M::identity(4)).unwrap(), 1.0);
        assert_eq!(max_eigenvalue(&M::from_diag(&[0.2, 0.8])).unwrap(), 0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in [2, 3, 4, 8] {
            let psi = random_unit(&mut rng, d);
            let scaled = M::outer(&psi, &psi).scale(d as f64);
            assert!((max_eigenvalue(&scaled).unwrap() - d as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn max_eigenvalue_dominates_rayleigh_quotients() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for d in [2, 3, 4, 8] {
            let a = random_hermitian(&mut rng, d);
            let top = max_eigenvalue(&a).unwrap();
            for _ in 0..50 {
                let x = random_unit(&mut rng, d);
                let ax = a.mul_vec(&x);
                let q: f64 = x.iter().zip(&ax).map(|(u, v)| (u.conj() * v).re).sum();
                assert!(top >= q - 1e-12);
            }
        }
    }

    #[test]
    fn svd_reconstructs_and_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for d in [1, 2, 3, 4, 8] {
            for rank in [1, d] {
                let a = random_matrix(&mut rng, d);
                let b = M::from_fn(d, |i, j| if j < rank { a[(i, j)] } else { c(0.0, 0.0) });
                let s = svd(&b).unwrap();
                let sigma = M::from_diag(&s.singular_values);
                let rebuilt = &(&s.u * &sigma) * &s.v.adjoint();
                assert!(rebuilt.max_abs_diff(&b) < 1e-12 * d as f64);
                assert!((&s.u.adjoint() * &s.u).max_abs_diff(&M::identity(d)) < 1e-12);
                assert!((&s.v.adjoint() * &s.v).max_abs_diff(&M::identity(d)) < 1e-12);
                assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn svd_of_zero_matrix_completes_basis() {
        let s = svd(&M::zeros(3)).unwrap();
        assert_eq!(s.singular_values, vec![0.0; 3]);
        assert!(s.u.max_abs_diff(&M::identity(3)) < 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let a = ComplexMatrix::<f32>::from_diag(&[4.0, 9.0]);
        let s = psd_sqrt(&a).unwrap();
        assert!((s[(1, 1)].re - 3.0).abs() < 1e-6);
    }
}
