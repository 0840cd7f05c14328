//! phaselab: a desk-scale numerical laboratory for phase-retrieval
//! stability of generalized wavelet transforms on finite cyclic groups.
//!
//! The crate builds filter banks on Z_N, runs the associated wavelet
//! transform and its reproducing-kernel projection, computes kernel and
//! graph Cheeger constants with certified witnesses, constructs modulus
//! ambiguities, and evaluates the resulting stability bounds by direct
//! computation.

pub mod ambiguity;
pub mod cheeger_graph;
pub mod cheeger_kernel;
pub mod error;
pub mod experiments;
pub mod filterbank;
pub mod harmonic;
pub mod io;
pub mod transform;

pub use error::{Error, Result};
pub use harmonic::{Field, Signal, Spectrum};
