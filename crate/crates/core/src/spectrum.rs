//! Eigenvalues of the oscillator with frequency `ω²(E) = 1 + γ Eᵛ`.
//!
//! Units are ħ = m = ω = 1. Substituting the Hermite ansatz into the
//! Schrödinger equation gives the self-consistency condition
//!
//! ```text
//! E² − (n+½)² γ Eᵛ − (n+½)² = 0
//! ```
//!
//! together with `E = (n+½) λ`, where `λ = √(1 + γ Eᵛ)` is the width
//! parameter of the Gaussian envelope. Only the positive root is kept.

use crate::error::{Error, Result};

/// Power of the energy in the frequency, `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    /// ν = 1, `ω² = 1 + γE`.
    Linear,
    /// ν = 2, `ω² = 1 + γE²`.
    Quadratic,
}

impl Case {
    pub fn nu(self) -> u8 {
        match self {
            Case::Linear => 1,
            Case::Quadratic => 2,
        }
    }
}

impl TryFrom<u8> for Case {
    type Error = Error;

    fn try_from(nu: u8) -> Result<Self> {
        match nu {
            1 => Ok(Case::Linear),
            2 => Ok(Case::Quadratic),
            other => Err(Error::InvalidParams(format!(
                "nu must be 1 or 2, got {other}"
            ))),
        }
    }
}

/// Which weight `f(x) = 1 − ∂V/∂E` multiplies `|ψ|²` in the density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DensityMode {
    /// `f(x) = 1 − (γ/2) x²` for both cases.
    #[default]
    GammaOnly,
    /// `f(x) = 1 − (ν γ Eᵛ⁻¹ / 2) x²`, the actual `∂V/∂E` of the
    /// energy-dependent potential. Identical to `GammaOnly` for ν = 1.
    NuConsistent,
}

/// Physical configuration of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    gamma: f64,
    case: Case,
    density_mode: DensityMode,
    permissive: bool,
}

impl ModelParams {
    /// Validated constructor. Rejects `γ > 0`, for which the weighted
    /// density is negative at large |x|.
    pub fn new(gamma: f64, case: Case) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::InvalidParams(format!(
                "gamma must be finite, got {gamma}"
            )));
        }
        if gamma > 0.0 {
            return Err(Error::InvalidParams(format!(
                "gamma must be <= 0 for a positive density, got {gamma}"
            )));
        }
        Ok(Self {
            gamma,
            case,
            density_mode: DensityMode::default(),
            permissive: false,
        })
    }

    /// Accepts any finite `γ`, including positive values. For exploration
    /// only; several invariants do not hold for `γ > 0`.
    pub fn permissive(gamma: f64, case: Case) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::InvalidParams(format!(
                "gamma must be finite, got {gamma}"
            )));
        }
        Ok(Self {
            gamma,
            case,
            density_mode: DensityMode::default(),
            permissive: true,
        })
    }

    pub fn with_density_mode(mut self, mode: DensityMode) -> Self {
        self.density_mode = mode;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn case(&self) -> Case {
        self.case
    }

    pub fn nu(&self) -> u8 {
        self.case.nu()
    }

    pub fn density_mode(&self) -> DensityMode {
        self.density_mode
    }

    pub fn is_permissive(&self) -> bool {
        self.permissive
    }
}

/// A single bound state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLevel {
    pub n: u64,
    pub energy: f64,
    /// `λ = √(1 + γ Eᵛ)`.
    pub lambda: f64,
}

impl EnergyLevel {
    /// `n + ½`.
    pub fn half_index(&self) -> f64 {
        self.n as f64 + 0.5
    }
}

/// Positive-branch eigenvalue for quantum number `n`.
///
/// Evaluated as `E = (n+½) λ` with `λ` written so that no two large
/// terms cancel when `γ < 0`; the direct two-term form loses about
/// `log10(|γ| n²)` digits (see [`eigenvalue_direct`]).
pub fn eigenvalue(params: &ModelParams, n: u64) -> Result<EnergyLevel> {
    let h = n as f64 + 0.5;
    let g = params.gamma();
    let lambda = match params.case() {
        Case::Linear => {
            // λ² − γ h λ − 1 = 0
            let root = (g * g * h * h + 4.0).sqrt();
            if g <= 0.0 {
                2.0 / (root - g * h)
            } else {
                0.5 * (g * h + root)
            }
        }
        Case::Quadratic => {
            let arg = 1.0 - g * h * h;
            if !(arg > 0.0) {
                return Err(Error::Domain(format!(
                    "4 - gamma (2n+1)^2 must be positive (gamma = {g}, n = {n})"
                )));
            }
            1.0 / arg.sqrt()
        }
    };
    let energy = h * lambda;
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::NonPositiveEnergy { n, energy });
    }
    Ok(EnergyLevel { n, energy, lambda })
}

/// Textbook two-term closed form, evaluated as written.
///
/// For ν = 1 this is `γ(2n+1)²/8 + (n+½)√(1 + γ²(2n+1)²/16)`, which
/// suffers cancellation for `γ < 0` and large `n`. Kept for comparison.
pub fn eigenvalue_direct(params: &ModelParams, n: u64) -> f64 {
    let g = params.gamma();
    let m = 2.0 * n as f64 + 1.0;
    match params.case() {
        Case::Linear => g / 8.0 * m * m + 0.5 * m * (1.0 + g * g / 16.0 * m * m).sqrt(),
        Case::Quadratic => m / (4.0 - g * m * m).sqrt(),
    }
}

#[cfg(test)]
/// The discarded root of the characteristic equation. Diagnostic only.
pub(crate) fn negative_branch(params: &ModelParams, n: u64) -> f64 {
    let g = params.gamma();
    let m = 2.0 * n as f64 + 1.0;
    match params.case() {
        Case::Linear => g / 8.0 * m * m - 0.5 * m * (1.0 + g * g / 16.0 * m * m).sqrt(),
        Case::Quadratic => -m / (4.0 - g * m * m).sqrt(),
    }
}

/// `E² − (n+½)² γ Eᵛ − (n+½)²`; zero exactly at the eigenvalues.
pub fn residual(params: &ModelParams, n: u64, energy: f64) -> f64 {
    let h = n as f64 + 0.5;
    let e_nu = match params.case() {
        Case::Linear => energy,
        Case::Quadratic => energy * energy,
    };
    energy * energy - h * h * params.gamma() * e_nu - h * h
}

/// Accumulation point `Γ` of the spectrum: `1/|γ|` for ν = 1 and
/// `1/√|γ|` for ν = 2.
pub fn saturation_limit(params: &ModelParams) -> Result<f64> {
    let g = params.gamma();
    if !(g < 0.0) {
        return Err(Error::Domain(format!(
            "saturation limit needs gamma < 0, got {g}"
        )));
    }
    Ok(match params.case() {
        Case::Linear => 1.0 / g.abs(),
        Case::Quadratic => 1.0 / g.abs().sqrt(),
    })
}

/// `(Γ − E_n)/Γ`, evaluated without cancellation.
///
/// ν = 1: with `a = |γ|(n+½)`, `E/Γ = 2a/(a + √(a²+4))` so the gap is
/// `4/(a + √(a²+4))²`. ν = 2: with `b = √|γ|(n+½)` the gap is
/// `1/(s(s+b))`, `s = √(1+b²)`.
pub fn relative_gap(params: &ModelParams, n: u64) -> Result<f64> {
    let g = params.gamma();
    if !(g < 0.0) {
        return Err(Error::Domain(format!(
            "saturation gap needs gamma < 0, got {g}"
        )));
    }
    let h = n as f64 + 0.5;
    Ok(match params.case() {
        Case::Linear => {
            let a = g.abs() * h;
            let d = a + (a * a + 4.0).sqrt();
            4.0 / (d * d)
        }
        Case::Quadratic => {
            let b = g.abs().sqrt() * h;
            let s = (1.0 + b * b).sqrt();
            1.0 / (s * (s + b))
        }
    })
}

/// Threshold rule locating the onset of saturation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationRule {
    /// Relative distance to `Γ` below which a level counts as saturated.
    pub eps: f64,
    /// Largest quantum number searched.
    pub cap: u64,
}

impl Default for SaturationRule {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            cap: 1_000_000_000_000,
        }
    }
}

impl SaturationRule {
    pub fn with_eps(eps: f64) -> Self {
        Self {
            eps,
            ..Self::default()
        }
    }
}

/// Smallest `N` with `|E_N − Γ|/Γ < eps`.
///
/// The gap is strictly decreasing in `n`, so the search is a bisection
/// over `[0, cap]`.
pub fn saturation_index(params: &ModelParams, rule: &SaturationRule) -> Result<u64> {
    let eps = rule.eps;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParams(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    if relative_gap(params, 0)? < eps {
        return Ok(0);
    }
    if relative_gap(params, rule.cap)? >= eps {
        return Err(Error::NotReached { eps, cap: rule.cap });
    }
    let (mut lo, mut hi) = (0u64, rule.cap);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if relative_gap(params, mid)? < eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Levels `0..=n_max`.
pub fn spectrum_table(params: &ModelParams, n_max: u64) -> Result<Vec<EnergyLevel>> {
    (0..=n_max).map(|n| eigenvalue(params, n)).collect()
}
