//! Covariance-matrix simulation of a multipass light–atom quantum interface.
//!
//! A light pulse crosses an atomic ensemble several times. Both systems are
//! described by one bosonic mode each and the interaction is a bilinear
//! `p_at p_ph` coupling, optionally switched to `x_at x_ph` on alternate
//! passes, so the joint state stays Gaussian and is fully described by a
//! 4×4 covariance matrix.
//!
//! - [`gaussian`]: covariance matrices, symplectic eigenvalues, rotations and
//!   homodyne conditioning.
//! - [`dynamics`]: scattering matrix, lossy single pass and multipass runs.
//! - [`measures`]: EPR variance, Gaussian entanglement of formation,
//!   squeezing and logarithmic negativity.
//! - [`optimize`]: per-pass-count parameter optimization.
//! - [`physical`]: laboratory quantities to model parameters.
//! - [`runner`]: figure sweeps, CSV output and the check battery.

pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod measures;
pub mod optimize;
pub mod physical;
pub mod runner;
pub mod simplex;

pub use error::{Error, Result};
