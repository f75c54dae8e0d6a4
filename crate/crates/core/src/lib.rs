//! Herglotz integral representations, Szegő-type kernels and Carathéodory
//! approximation by rational inner functions, computed numerically on the
//! disc, polydisc, symmetrized bidisc, Reinhardt domains and the annulus.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`] holds the shared numeric kernels (FFT coefficients,
//!   Hermitian spectra, nonnegative least squares).
//! * [`functions`] evaluates symbolic function descriptions and Cayley
//!   transforms.
//! * [`measures`] stores boundary measures and computes their moments.
//! * [`kernels`] evaluates closed-form Szegő, Poisson–Szegő and Herglotz
//!   kernels.
//! * [`herglotz_disc`], [`caratheodory`], [`polydisc_kp`], [`annulus`] and
//!   [`operator_lift`] build the representation and recovery pipelines on
//!   top of those.

pub mod annulus;
pub mod caratheodory;
pub mod error;
pub mod functions;
pub mod herglotz_disc;
pub mod kernels;
pub mod measures;
pub mod numerics;
pub mod operator_lift;
pub mod polydisc_kp;
mod serde_complex;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use annulus::{AnnulusRecovery, AnnulusVerifyReport, HardyBasisNumeric, HarmonicMeasure};
pub use caratheodory::{CaraConfig, RationalInnerSpec, RecoveryConvergence};
pub use functions::{FunctionSpec, MatrixValue, SchurReport};
pub use herglotz_disc::HerglotzDiscRep;
pub use kernels::{DomainKind, DomainSpec};
pub use measures::{Atom, Boundary, BoundaryMeasure, MatrixAtom, MatrixBoundaryMeasure, MomentTable};
pub use numerics::{FourierTable, HermitianMatrix, NnlsSolution};
pub use operator_lift::MatrixHerglotzRep;
pub use polydisc_kp::{KpRep, KpVerifyReport};
