//! Resolving two incoherent point sources below the Rayleigh limit with array
//! homodyne detection.
//!
//! The crate models a one-dimensional imaging system whose image plane is read
//! out by a pixelated balanced homodyne detector.  Each shot yields a vector of
//! rescaled field quadratures `q`, zero-mean Gaussian with covariance
//! `C = S Γ + I`.  On top of that model it provides
//!
//! * [`optics`]: transfer functions, overlaps and the eigenmodes of the
//!   coherence function,
//! * [`detector`]: the pixel grid and the covariance matrix,
//! * [`fisher`]: the Fisher information for half-separation and centroid,
//!   computed on the grid, from the continuous three-term decomposition, and
//!   from closed-form approximations,
//! * [`montecarlo`]: seeded quadrature sampling,
//! * [`estimator`]: the displaced-mode variance sweep estimator and the
//!   repeated-experiment harness,
//! * [`cli`]: the `fisher-scan`, `simulate` and `sweep-demo` commands.

pub mod cli;
pub mod detector;
pub mod error;
pub mod estimator;
pub mod fisher;
pub mod montecarlo;
pub mod optics;
pub mod quadrature;

pub use detector::{build_covariance, build_gamma, principal_components, CovarianceModel, DetectorGrid, LowRankGamma, PrincipalComponents};
pub use error::{Error, Result};
pub use optics::{Aperture, ApertureModel, BinarySource, ModeSign, Parameter, SourceModel};
