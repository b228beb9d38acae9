//! Quantum transmission through unified Cantor potentials.
//!
//! The family interpolates between general Cantor (fractal) and
//! Smith-Volterra-Cantor (non-fractal) barrier arrays. Transmission is
//! computed from closed-form super-periodic formulas and cross-checked
//! against a brute-force transfer-matrix product.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod math;
pub mod oracle;
pub mod scattering;

pub use error::{Result, SpecViolation, UcpError};
pub use geometry::{max_valid_stage, Barrier, SegmentGeometry, StageLengths, StageLimit, UcpSpec};
pub use oracle::{propagation_matrix, transmission_oracle, transmission_oracle_with_cap, DEFAULT_ORACLE_CAP};
pub use scattering::{
    barrier_matrix, bloch_sequence, transmission_spp, transmission_ucp, BlochSequence, ScatterResult,
    TransferMatrix,
};
