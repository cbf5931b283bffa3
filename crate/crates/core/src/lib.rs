//! Fluorescence-detected quantum process tomography for excitonic dimers.
//!
//! The crate simulates phase-modulated two-dimensional fluorescence signals of an
//! electronically coupled dimer, then inverts them back into the process tensor
//! χ(T) of the single-exciton manifold. Everything here is pure computation and
//! builds without `std`; file formats, configuration and the command line live in
//! the companion `fsqpt` crate.
//!
//! The pipeline, in the order data flows through it:
//!
//! * [`model`]: site Hamiltonian to exciton basis and transition dipoles.
//! * [`bath`]: secular Redfield rates, optical dephasing and the ground-truth χ(T).
//! * [`pulse`]: excitation coefficients of the two-colour pulse toolbox and the
//!   16×16 experiment matrix C.
//! * [`response`]: Feynman-pathway bookkeeping and the 16 pathway amplitudes P.
//! * [`orientation`]: isotropic averaging and the M blocks linking P to χ.
//! * [`reconstruction`]: C⁻¹ then M⁻¹, closure of the ground row, validation.
//! * [`ensemble`]: diagonal-disorder sampling and deterministic averaging.

#![no_std]
#![warn(missing_debug_implementations)]
// `!(x >= 0.0)` is the NaN-rejecting form used throughout validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod bath;
pub mod ensemble;
mod error;
pub mod levels;
mod linalg;
pub mod model;
pub mod orientation;
pub mod pulse;
pub mod reconstruction;
pub mod response;
pub mod tensor;
pub mod units;

pub use error::{Error, Result};
pub use levels::{Exciton, Level, PathwayLabels, Transition};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

pub mod prelude {
    pub use crate::bath::{
        build_redfield_generator, optical_coherence_propagator, propagate_process_tensor, spectral_density, BathParams,
        RedfieldGenerator,
    };
    pub use crate::ensemble::{average_signals, sample_members, EnsembleSpec, SimulationSetup};
    pub use crate::model::{build_exciton_basis, DimerParams, ExcitonBasis};
    pub use crate::orientation::{build_m_blocks, iso_average_four, solve_chi_blocks, MBlocks};
    pub use crate::pulse::{build_c_matrix, CMatrix, Carrier, PulseToolbox};
    pub use crate::reconstruction::{invert_signals, reconstruct, Inversion, NoiseModel, ReconstructionReport};
    pub use crate::response::{
        assemble_signal, pathway_amplitude, FixedOrientation, IsotropicAverage, PathwayCatalog, PathwaySignalSet,
        ResponseMode, SignalTable,
    };
    pub use crate::tensor::{validate_tensor, ProcessTensor, TensorDefects};
    pub use crate::units::UnitSystem;
    pub use crate::{Exciton, Level, PathwayLabels, Transition, C64};
}
