//! Multiplexed projective-measurement tomography for photonic qudits encoded
//! in the transverse momentum of a photon passing through `d` slits.
//!
//! * [`qudit`]: state types, Uhlmann fidelity, physicality projection.
//! * [`optics`]: far-field interference model and multiplexed readout.
//! * [`bases`]: self-multiplexing bases and informationally complete sets.
//! * [`tomography`]: forward model and linear-inversion reconstruction.
//! * [`experiments`]: shot noise, mixed-state ensembles, end-to-end runs.

pub mod bases;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod optics;
pub mod qudit;
pub mod tomography;

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;

pub use error::{Error, Result};
pub use qudit::{DensityMatrix, QuditState};
