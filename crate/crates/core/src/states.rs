//! Density matrices, pure states, purifications and seeded random ensembles.

use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, HERMITIAN_TOL, PSD_FLOOR};
use crate::scalar::Real;

/// Trace must equal one within this tolerance.
pub const TRACE_TOL: f64 = 1e-8;
/// Pure state vectors must have unit norm within this tolerance.
pub const NORM_TOL: f64 = 1e-10;

/// Hermitian, positive semi-definite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    mat: ComplexMatrix<T>,
}

/// Validation thresholds for [`density_from_matrix_with`].
#[derive(Debug, Clone, Copy)]
pub struct StateTolerances {
    pub hermitian: f64,
    pub psd_floor: f64,
    pub trace: f64,
}

impl Default for StateTolerances {
    fn default() -> Self {
        Self {
            hermitian: HERMITIAN_TOL,
            psd_floor: PSD_FLOOR,
            trace: TRACE_TOL,
        }
    }
}

/// Validates `m` as a density matrix with the default tolerances.
pub fn density_from_matrix<T: Real>(m: ComplexMatrix<T>) -> Result<DensityMatrix<T>> {
    density_from_matrix_with(m, &StateTolerances::default())
}

/// Validates `m`, symmetrizing it and clamping eigenvalues in `[-psd_floor, 0)`.
///
/// When clamping changes the spectrum the result is renormalized to unit trace.
pub fn density_from_matrix_with<T: Real>(
    m: ComplexMatrix<T>,
    tol: &StateTolerances,
) -> Result<DensityMatrix<T>> {
    if !m.is_finite() {
        return Err(Error::InvalidState("non-finite entry".into()));
    }
    let defect = m.hermitian_defect();
    if defect > T::lit(tol.hermitian) {
        return Err(Error::InvalidState(format!(
            "hermiticity: max |M - M^dagger| = {:e}",
            defect.as_f64()
        )));
    }
    let trace = m.trace();
    if (trace.re - T::one()).abs() > T::lit(tol.trace) || trace.im.abs() > T::lit(tol.trace) {
        return Err(Error::InvalidState(format!(
            "trace: {} + {}i is not 1",
            trace.re, trace.im
        )));
    }
    let sym = m.symmetrized();
    let e = linalg::eigh(&sym)
        .map_err(|e| Error::InvalidState(format!("eigendecomposition failed: {e}")))?;
    let min = e.min();
    if min < -T::lit(tol.psd_floor) {
        return Err(Error::InvalidState(format!(
            "positivity: min eigenvalue {:e}",
            min.as_f64()
        )));
    }
    if min >= T::zero() {
        return Ok(DensityMatrix { mat: sym });
    }
    let clamped = e.map(|l| l.max(T::zero()));
    let tr = clamped.trace().re;
    Ok(DensityMatrix {
        mat: clamped.scale(T::one() / tr),
    })
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(m: ComplexMatrix<T>) -> Result<Self> {
        density_from_matrix(m)
    }

    /// `I / d`
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim).scale(T::one() / T::from_usize_lossy(dim)),
        }
    }

    /// Diagonal state with the given populations (validated).
    pub fn from_diag(p: &[T]) -> Result<Self> {
        density_from_matrix(ComplexMatrix::from_diag(p))
    }

    pub fn from_pure(psi: &PureState<T>) -> Self {
        Self {
            mat: ComplexMatrix::outer(psi.as_slice(), psi.as_slice()),
        }
    }

    /// `G G^dagger / tr(G G^dagger)` for any nonzero finite factor `G` (d x k, row-major).
    pub fn from_factor(g: &[Complex<T>], dim: usize, cols: usize) -> Result<Self> {
        if g.len() != dim * cols || dim == 0 || cols == 0 {
            return Err(Error::InvalidSpec(format!(
                "factor of length {} is not {dim} x {cols}",
                g.len()
            )));
        }
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let mut acc = Complex::zero();
                for k in 0..cols {
                    acc = acc + g[i * cols + k] * g[j * cols + k].conj();
                }
                m[(i, j)] = acc;
                m[(j, i)] = acc.conj();
            }
            m[(i, i)].im = T::zero();
        }
        let tr = m.trace().re;
        if tr.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) || !tr.is_finite() {
            return Err(Error::InvalidState(format!("factor has trace {tr}")));
        }
        Ok(Self {
            mat: m.scale(T::one() / tr),
        })
    }

    pub(crate) fn from_trusted(mat: ComplexMatrix<T>) -> Self {
        Self { mat }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.mat
    }

    /// Conjugation by a unitary, `U rho U^dagger`.
    pub fn rotated(&self, u: &ComplexMatrix<T>) -> Result<Self> {
        density_from_matrix(self.mat.conjugated_by(u).symmetrized())
    }
}

impl<T: Real> fmt::Display for DensityMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.mat.rows() {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Unit-norm complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Real> {
    vec: Vec<Complex<T>>,
}

impl<T: Real> PureState<T> {
    /// Accepts a vector whose norm is within [`NORM_TOL`] of one.
    pub fn new(vec: Vec<Complex<T>>) -> Result<Self> {
        if vec.is_empty() || vec.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("empty or non-finite vector".into()));
        }
        let norm = norm(&vec);
        if (norm - T::one()).abs() > T::lit(NORM_TOL) {
            return Err(Error::InvalidState(format!("norm: {norm} is not 1")));
        }
        Ok(Self { vec })
    }

    /// Normalizes any nonzero finite vector.
    pub fn normalized(vec: Vec<Complex<T>>) -> Result<Self> {
        let n = norm(&vec);
        if n.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) || !n.is_finite() {
            return Err(Error::InvalidState(format!(
                "cannot normalize vector of norm {n}"
            )));
        }
        Ok(Self {
            vec: vec.into_iter().map(|z| z.unscale(n)).collect(),
        })
    }

    /// Standard basis vector `e_k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut vec = vec![Complex::zero(); dim];
        vec[k] = Complex::one();
        Self { vec }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.vec
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.vec
            .iter()
            .zip(&other.vec)
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * *b)
    }

    pub fn density(&self) -> DensityMatrix<T> {
        DensityMatrix::from_pure(self)
    }

    /// Fixes the global phase so the first nonzero component is real and nonnegative.
    pub fn phase_pinned(mut self) -> Self {
        if let Some(first) = self.vec.iter().find(|z| !z.is_zero()).copied() {
            let phase = first.conj().unscale(first.norm());
            for z in &mut self.vec {
                *z = *z * phase;
            }
            if let Some(z) = self.vec.iter_mut().find(|z| !z.is_zero()) {
                z.im = T::zero();
            }
        }
        self
    }
}

fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// `lambda * rho + (1 - lambda) * sigma`
pub fn mix<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
    lambda: T,
) -> Result<DensityMatrix<T>> {
    check_dims(rho, sigma)?;
    check_lambda(lambda)?;
    if lambda == T::one() {
        return Ok(rho.clone());
    }
    if lambda == T::zero() {
        return Ok(sigma.clone());
    }
    let mixed = &rho.mat.scale(lambda) + &sigma.mat.scale(T::one() - lambda);
    Ok(DensityMatrix::from_trusted(mixed))
}

pub(crate) fn check_dims<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

pub(crate) fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if !(lambda >= T::zero() && lambda <= T::one()) {
        return Err(Error::LambdaOutOfRange(lambda.as_f64()));
    }
    Ok(())
}

/// Coefficient matrix `C` of a bipartite vector, `|Psi> = sum_ij C_ij |i>|j>`.
fn vectorize<T: Real>(c: &ComplexMatrix<T>) -> Vec<Complex<T>> {
    c.as_slice().to_vec()
}

/// Canonical purification `sum_j (sqrt(rho)|j>) (x) |j>` on the d^2-dimensional space,
/// with its global phase pinned.
pub fn purify<T: Real>(rho: &DensityMatrix<T>) -> Result<PureState<T>> {
    let root = linalg::psd_sqrt(rho.matrix())?;
    Ok(PureState::normalized(vectorize(&root))?.phase_pinned())
}

/// Partial trace over the second factor of a vector on `C^da (x) C^db`.
pub fn partial_trace_second<T: Real>(
    psi: &PureState<T>,
    da: usize,
    db: usize,
) -> Result<ComplexMatrix<T>> {
    if psi.dim() != da * db {
        return Err(Error::DimensionMismatch {
            left: psi.dim(),
            right: da * db,
        });
    }
    let v = psi.as_slice();
    Ok(ComplexMatrix::from_fn(da, |i, k| {
        (0..db).fold(Complex::zero(), |acc, j| {
            acc + v[i * db + j] * v[k * db + j].conj()
        })
    }))
}

/// Purifications `|Psi>`, `|Phi>` of `rho`, `sigma` whose overlap attains the fidelity.
///
/// Both start from the canonical square-root purification; the second factor of
/// `|Phi>` is then rotated by the polar unitary of `sqrt(sigma) sqrt(rho)`.
pub fn optimal_purifications<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
) -> Result<(PureState<T>, PureState<T>)> {
    check_dims(rho, sigma)?;
    let sqrt_rho = linalg::psd_sqrt(rho.matrix())?;
    let sqrt_sigma = linalg::psd_sqrt(sigma.matrix())?;
    let polar = linalg::svd(&(&sqrt_sigma * &sqrt_rho))?.polar_unitary();
    let aligned = &sqrt_sigma * &polar;
    let psi = PureState::normalized(vectorize(&sqrt_rho))?.phase_pinned();
    let phi = PureState::normalized(vectorize(&aligned))?.phase_pinned();
    Ok((psi, phi))
}

/// Random-state ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Ensemble {
    /// Normalized complex Gaussian vector.
    HaarPure,
    /// `G G^dagger / tr` with `G` square.
    GinibreFullRank,
    /// `G G^dagger / tr` with `G` of shape d x k.
    GinibreRank { k: usize },
    /// `|psi> = U e1`, `|phi> = U (r e1 + sqrt(1 - r^2) e2)` with Haar-random `U`.
    PurePairWithOverlap { r: f64 },
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ensemble::HaarPure => write!(f, "haar_pure"),
            Ensemble::GinibreFullRank => write!(f, "ginibre_full_rank"),
            Ensemble::GinibreRank { k } => write!(f, "ginibre_rank_k:{k}"),
            Ensemble::PurePairWithOverlap { r } => write!(f, "pure_pair_with_overlap:{r}"),
        }
    }
}

impl std::str::FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let bad = || Error::InvalidSpec(format!("unknown ensemble {s:?}"));
        match (name, arg) {
            ("haar_pure", None) => Ok(Ensemble::HaarPure),
            ("ginibre_full_rank" | "ginibre", None) => Ok(Ensemble::GinibreFullRank),
            ("ginibre_rank_k" | "ginibre_rank", Some(a)) => Ok(Ensemble::GinibreRank {
                k: a.parse().map_err(|_| bad())?,
            }),
            ("pure_pair_with_overlap" | "pure_pair", Some(a)) => {
                Ok(Ensemble::PurePairWithOverlap {
                    r: a.parse().map_err(|_| bad())?,
                })
            }
            _ => Err(bad()),
        }
    }
}

impl Ensemble {
    pub fn is_pure(&self) -> bool {
        matches!(
            self,
            Ensemble::HaarPure | Ensemble::PurePairWithOverlap { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub dim: usize,
    pub ensemble: Ensemble,
    pub seed: u64,
}

impl SampleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidSpec("dim must be positive".into()));
        }
        match self.ensemble {
            Ensemble::GinibreRank { k } if k == 0 || k > self.dim => Err(Error::InvalidSpec(
                format!("rank k = {k} outside 1..={}", self.dim),
            )),
            Ensemble::PurePairWithOverlap { r } if !(0.0..=1.0).contains(&r) => Err(
                Error::InvalidSpec(format!("overlap r = {r} outside [0, 1]")),
            ),
            Ensemble::PurePairWithOverlap { .. } if self.dim < 2 => Err(Error::InvalidSpec(
                "overlap-pinned pairs need dim >= 2".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Output of [`sample`].
#[derive(Debug, Clone)]
pub enum Sample<T: Real> {
    Pure(PureState<T>),
    Mixed(DensityMatrix<T>),
    PurePair(PureState<T>, PureState<T>),
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-unit seed `hash(master, index)`; units seeded this way can run on any worker.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(
        mix64(master.wrapping_add(0x9e37_79b9_7f4a_7c15))
            ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03),
    )
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex normal with independent unit-variance real and imaginary parts.
pub fn complex_normal<T: Real>(rng: &mut ChaCha8Rng) -> Complex<T> {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(T::lit(re), T::lit(im))
}

/// Row-major d x k matrix of complex normals.
pub fn ginibre_factor<T: Real>(rng: &mut ChaCha8Rng, dim: usize, cols: usize) -> Vec<Complex<T>> {
    (0..dim * cols).map(|_| complex_normal(rng)).collect()
}

pub fn haar_pure<T: Real>(rng: &mut ChaCha8Rng, dim: usize) -> PureState<T> {
    loop {
        let v: Vec<Complex<T>> = (0..dim).map(|_| complex_normal(rng)).collect();
        if let Ok(psi) = PureState::normalized(v) {
            return psi;
        }
    }
}

/// Haar-random unitary: modified Gram-Schmidt on the columns of a square Ginibre matrix.
pub fn haar_unitary<T: Real>(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix<T> {
    loop {
        let g = ginibre_factor::<T>(rng, dim, dim);
        let mut cols: Vec<Vec<Complex<T>>> = (0..dim)
            .map(|j| (0..dim).map(|i| g[i * dim + j]).collect())
            .collect();
        let mut ok = true;
        for j in 0..dim {
            for k in 0..j {
                let proj = cols[k]
                    .iter()
                    .zip(&cols[j])
                    .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * *b);
                let prev = cols[k].clone();
                for (c, a) in cols[j].iter_mut().zip(&prev) {
                    *c = *c - *a * proj;
                }
            }
            let n = norm(&cols[j]);
            if n.partial_cmp(&T::lit(1e-8)) != Some(std::cmp::Ordering::Greater) {
                ok = false;
                break;
            }
            for c in &mut cols[j] {
                *c = c.unscale(n);
            }
        }
        if ok {
            return ComplexMatrix::from_fn(dim, |i, j| cols[j][i]);
        }
    }
}

fn ginibre_state<T: Real>(rng: &mut ChaCha8Rng, dim: usize, cols: usize) -> DensityMatrix<T> {
    loop {
        let g = ginibre_factor(rng, dim, cols);
        if let Ok(rho) = DensityMatrix::from_factor(&g, dim, cols) {
            return rho;
        }
    }
}

fn overlap_pair<T: Real>(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> (PureState<T>, PureState<T>) {
    let u = haar_unitary::<T>(rng, dim);
    let r = T::lit(r);
    let s = (T::one() - r * r).max(T::zero()).sqrt();
    let psi = u.column(0);
    let e2 = u.column(1);
    let phi = psi
        .iter()
        .zip(&e2)
        .map(|(a, b)| a.scale(r) + b.scale(s))
        .collect();
    (PureState { vec: psi }, PureState { vec: phi })
}

/// Draws one sample; bit-identical for identical specs.
pub fn sample<T: Real>(spec: &SampleSpec) -> Result<Sample<T>> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    Ok(match spec.ensemble {
        Ensemble::HaarPure => Sample::Pure(haar_pure(&mut rng, spec.dim)),
        Ensemble::GinibreFullRank => Sample::Mixed(ginibre_state(&mut rng, spec.dim, spec.dim)),
        Ensemble::GinibreRank { k } => Sample::Mixed(ginibre_state(&mut rng, spec.dim, k)),
        Ensemble::PurePairWithOverlap { r } => {
            let (a, b) = overlap_pair(&mut rng, spec.dim, r);
            Sample::PurePair(a, b)
        }
    })
}

/// A pair `(rho, sigma)` from one seeded stream of the given ensemble.
pub fn sample_pair<T: Real>(spec: &SampleSpec) -> Result<(DensityMatrix<T>, DensityMatrix<T>)> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let d = spec.dim;
    Ok(match spec.ensemble {
        Ensemble::HaarPure => (
            haar_pure(&mut rng, d).density(),
            haar_pure(&mut rng, d).density(),
        ),
        Ensemble::GinibreFullRank => (ginibre_state(&mut rng, d, d), ginibre_state(&mut rng, d, d)),
        Ensemble::GinibreRank { k } => {
            (ginibre_state(&mut rng, d, k), ginibre_state(&mut rng, d, k))
        }
        Ensemble::PurePairWithOverlap { r } => {
            let (a, b) = overlap_pair(&mut rng, d, r);
            (a.density(), b.density())
        }
    })
}

/// Pure pair from one seeded stream (`HaarPure` or `PurePairWithOverlap` only).
pub fn sample_pure_pair<T: Real>(spec: &SampleSpec) -> Result<(PureState<T>, PureState<T>)> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    match spec.ensemble {
        Ensemble::HaarPure => Ok((haar_pure(&mut rng, spec.dim), haar_pure(&mut rng, spec.dim))),
        Ensemble::PurePairWithOverlap { r } => Ok(overlap_pair(&mut rng, spec.dim, r)),
        other => Err(Error::InvalidSpec(format!(
            "{other} is not a pure-state ensemble"
        ))),
    }
}
