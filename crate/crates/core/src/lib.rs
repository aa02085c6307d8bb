//! Numerical laboratory for environment-induced decoherence.
//!
//! * [`hilbert`]: dense complex linear algebra on tensor-product spaces
//!   (partial traces, Hermitian spectra, entropies).
//! * [`decoherence`]: system/apparatus/environment states, reduced density
//!   matrices and an exactly solvable spin-bath dephasing model.
//! * [`lattice_qed`]: a 1D truncated-link U(1) lattice with exact Gauss-law
//!   handling, boundary charge, Wilson lines and charge superselection checks.
//! * [`field_decoherence`]: closed-form suppression of interference between
//!   macroscopic electric-field configurations, with SI/natural unit handling.

pub mod decoherence;
pub mod error;
pub mod field_decoherence;
pub mod hilbert;
pub mod lattice_qed;
pub mod par;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use par::Execution;
