//! Canonical-ensemble thermodynamics of the saturating spectrum.
//!
//! The partition function keeps the levels below the onset of saturation
//! and represents everything above it by a single term at the
//! accumulation point `Γ`:
//!
//! ```text
//! Z = Σ_{n=0}^{N} e^{-β E_n} + e^{-β Γ}
//! ```
//!
//! `U` and `C_v` are the Boltzmann mean and `β²`-scaled variance over that
//! same level set, so no numerical differentiation is involved.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectrum::{
    eigenvalue, saturation_index, saturation_limit, ModelParams, SaturationRule,
};

/// Terms whose bounded remainder falls below this fraction of the running
/// sum are dropped.
const TAIL_CUTOFF: f64 = 1e-17;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPoint {
    pub beta: f64,
    pub z: f64,
    /// `ln Z`; finite even where `Z` underflows.
    pub ln_z: f64,
    /// Internal energy `−∂ ln Z/∂β`.
    pub u: f64,
    /// Specific heat `β² ∂² ln Z/∂β²`.
    pub cv: f64,
    /// Saturation index used; `None` for the textbook oscillator.
    pub n_used: Option<u64>,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "beta must be positive and finite, got {beta}"
        )));
    }
    Ok(())
}

/// Weighted running mean and variance (West's update), shifted so the
/// first level has unit weight.
struct Moments {
    weight: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn new() -> Self {
        Self {
            weight: 0.0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    fn push(&mut self, energy: f64, w: f64) {
        if w == 0.0 {
            return;
        }
        self.weight += w;
        let delta = energy - self.mean;
        self.mean += delta * w / self.weight;
        self.m2 += w * delta * (energy - self.mean);
    }
}

fn saturated_point(
    params: &ModelParams,
    beta: f64,
    n_sat: u64,
    gamma_sat: f64,
) -> Result<ThermoPoint> {
    let ground = eigenvalue(params, 0)?.energy;
    let tail_scale = (1.0 + beta * gamma_sat).powi(2);
    let mut acc = Moments::new();
    for n in 0..=n_sat {
        let e = eigenvalue(params, n)?.energy;
        let w = (-beta * (e - ground)).exp();
        acc.push(e, w);
        // levels increase with n, so the rest is at most (N − n) w
        let remaining = (n_sat - n) as f64 * w * tail_scale;
        if remaining < TAIL_CUTOFF * acc.weight {
            break;
        }
    }
    acc.push(gamma_sat, (-beta * (gamma_sat - ground)).exp());
    let ln_z = acc.weight.ln() - beta * ground;
    Ok(ThermoPoint {
        beta,
        z: ln_z.exp(),
        ln_z,
        u: acc.mean,
        cv: beta * beta * acc.m2 / acc.weight,
        n_used: Some(n_sat),
    })
}

/// Partition function and derived quantities at one inverse temperature.
///
/// `γ = 0` is delegated to [`reference_partition_function`].
pub fn partition_function(
    params: &ModelParams,
    beta: f64,
    rule: &SaturationRule,
) -> Result<ThermoPoint> {
    check_beta(beta)?;
    if params.gamma() == 0.0 {
        return reference_partition_function(beta);
    }
    let n_sat = saturation_index(params, rule)?;
    let gamma_sat = saturation_limit(params)?;
    saturated_point(params, beta, n_sat, gamma_sat)
}

/// [`partition_function`] over a sorted grid of inverse temperatures.
pub fn specific_heat_curve(
    params: &ModelParams,
    beta_grid: &[f64],
    rule: &SaturationRule,
) -> Result<Vec<ThermoPoint>> {
    if beta_grid.is_empty() {
        return Err(Error::InvalidParams("beta grid is empty".into()));
    }
    for &b in beta_grid {
        check_beta(b)?;
    }
    if beta_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParams(
            "beta grid must be strictly increasing".into(),
        ));
    }
    if params.gamma() == 0.0 {
        return beta_grid
            .iter()
            .map(|&b| reference_partition_function(b))
            .collect();
    }
    let n_sat = saturation_index(params, rule)?;
    let gamma_sat = saturation_limit(params)?;
    beta_grid
        .par_iter()
        .map(|&b| saturated_point(params, b, n_sat, gamma_sat))
        .collect()
}

/// Textbook oscillator, `E_n = n + ½`, summed in closed form.
pub fn reference_partition_function(beta: f64) -> Result<ThermoPoint> {
    check_beta(beta)?;
    let half = 0.5 * beta;
    // ln(2 sinh(β/2)) = β/2 + ln(1 − e^{−β})
    let ln_z = -half - (-(-beta).exp()).ln_1p();
    Ok(ThermoPoint {
        beta,
        z: ln_z.exp(),
        ln_z,
        u: 0.5 / half.tanh(),
        cv: reference_specific_heat(beta),
        n_used: None,
    })
}

/// `(β/2)² / sinh²(β/2)`.
pub fn reference_specific_heat(beta: f64) -> f64 {
    let half = 0.5 * beta;
    let s = half.sinh();
    if s.is_infinite() {
        return 0.0;
    }
    half * half / (s * s)
}
