//! Spectrum, thermodynamics and information measures of the
//! one-dimensional harmonic oscillator whose frequency depends on the
//! energy, `ω²(E) = 1 + γ Eᵛ` with ν ∈ {1, 2}, under the modified scalar
//! product `∫ |ψ|² (1 − ∂V/∂E) dx`.
//!
//! Units: ħ = m = ω = k_B = 1.

// `!(a < b)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod information;
pub mod quadrature;
pub mod spectrum;
pub mod thermo;
pub mod wavefunction;

pub use error::{Error, Result};
pub use spectrum::{Case, DensityMode, EnergyLevel, ModelParams, SaturationRule};
pub use wavefunction::{Weight, WeightedDensity};
