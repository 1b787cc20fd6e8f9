//! Tavis-Cummings dimer toolkit: exact diagonalization of the fixed-excitation
//! sector, random-matrix diagnostics for real and complex spectra, the
//! classical mean-field limit with Lyapunov exponents, and the Lindblad
//! Liouvillian of the lossy/pumped dimer.

pub mod basis;
pub mod classical;
pub mod complex_stats;
pub mod dynamics;
pub mod error;
pub mod hermitian_stats;
pub mod histogram;
pub mod lindblad;
pub mod operators;
pub mod runner;
pub mod seeding;
pub mod sparse;

pub use error::{Error, Result};
