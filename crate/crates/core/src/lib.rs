//! Quantum fidelity, trace and Bures distances, max-relative entropy, and
//! numerical checks of fidelity bounds along mixing paths.
//!
//! The numerical core ([`linalg`], [`states`], [`metrics`], [`bounds`], [`io`])
//! is generic over the real scalar through [`Real`]; the sampling and search
//! harness in [`search`] runs in `f64`. The aliases below fix the scalar to `f64`.
//!
//! ```
//! use fidelity_bounds::{bounds, metrics, DensityMatrix64};
//!
//! let rho = DensityMatrix64::from_diag(&[0.9, 0.1]).unwrap();
//! let sigma = DensityMatrix64::maximally_mixed(2);
//! let f = metrics::fidelity(&rho, &sigma).unwrap();
//! let (lower, upper) = bounds::fvdg(&rho, &sigma, &Default::default()).unwrap();
//! assert!(lower.satisfied && upper.satisfied && f < 1.0);
//! ```

pub mod bounds;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod optimize;
pub mod scalar;
pub mod search;
pub mod states;

pub use bounds::{BoundId, Tolerances};
pub use error::{Error, Result};
pub use scalar::Real;
pub use states::Ensemble;

pub type ComplexMatrix64 = linalg::ComplexMatrix<f64>;
pub type DensityMatrix64 = states::DensityMatrix<f64>;
pub type PureState64 = states::PureState<f64>;
pub type BoundReport64 = bounds::BoundReport<f64>;
pub type SMaxResult64 = metrics::SMaxResult<f64>;
