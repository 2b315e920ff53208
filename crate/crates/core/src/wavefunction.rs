//! Eigenfunctions normalized under the modified scalar product
//! `∫ |ψ|² (1 − ∂V/∂E) dx = 1`, the weighted density built from them,
//! and the Perey factor `√(1 − ∂V/∂E)`.
//!
//! The eigenfunction of level `n` is `ψ(x) = C e^{-λx²/2} H_n(√λ x)`.
//! Everything is evaluated through the normalized Hermite function
//! `ĥ_n(y) = H_n(y) e^{-y²/2} / √(2ⁿ n! √π)`, so that
//! `ψ(x) = √(√λ / B) ĥ_n(√λ x)` with `B = 1 − c(2n+1)/(4λ)` and `c` the
//! weight coefficient defined by [`Weight`].

use std::f64::consts::PI;

use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, IntegrationSpec, Window};
use crate::spectrum::{eigenvalue, Case, DensityMode, EnergyLevel, ModelParams};

const RESCALE_ABOVE: f64 = 1e150;
const RESCALE_LN: f64 = 345.387_763_949_107_07; // 150 ln 10

/// `(ĥ_n(y), ĥ_{n-1}(y))`, with `ĥ_{-1} = 0`.
///
/// Runs the three-term recurrence
/// `ĥ_{k+1} = y √(2/(k+1)) ĥ_k − √(k/(k+1)) ĥ_{k-1}` on the polynomial
/// part and applies `e^{-y²/2}` at the end in log space, so neither
/// overflow nor premature underflow occurs.
pub fn hermite_pair(n: u64, y: f64) -> (f64, f64) {
    let mut log_scale = -0.5 * y * y;
    let mut prev = 0.0f64;
    let mut cur = PI.powf(-0.25);
    for k in 0..n {
        let kf = k as f64;
        let next = y * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            cur /= RESCALE_ABOVE;
            prev /= RESCALE_ABOVE;
            log_scale += RESCALE_LN;
        }
    }
    (apply_scale(cur, log_scale), apply_scale(prev, log_scale))
}

fn apply_scale(v: f64, log_scale: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    v.signum() * (v.abs().ln() + log_scale).exp()
}

/// Normalized Hermite function `ĥ_n(y)`.
pub fn hermite_fn(n: u64, y: f64) -> f64 {
    hermite_pair(n, y).0
}

/// `dĥ_n/dy = √(2n) ĥ_{n-1} − y ĥ_n`.
pub fn hermite_fn_derivative(n: u64, y: f64) -> f64 {
    let (h, h_prev) = hermite_pair(n, y);
    (2.0 * n as f64).sqrt() * h_prev - y * h
}

/// Density weight `f(x) = 1 − (c/2) x²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weight {
    coeff: f64,
}

impl Weight {
    pub fn from_coefficient(coeff: f64) -> Self {
        Self { coeff }
    }

    /// `c = γ` in [`DensityMode::GammaOnly`], `c = ν γ Eᵛ⁻¹` in
    /// [`DensityMode::NuConsistent`].
    pub fn for_level(params: &ModelParams, level: &EnergyLevel) -> Self {
        let g = params.gamma();
        let coeff = match (params.density_mode(), params.case()) {
            (DensityMode::GammaOnly, _) | (DensityMode::NuConsistent, Case::Linear) => g,
            (DensityMode::NuConsistent, Case::Quadratic) => 2.0 * g * level.energy,
        };
        Self { coeff }
    }

    pub fn coefficient(&self) -> f64 {
        self.coeff
    }

    pub fn value(&self, x: f64) -> f64 {
        1.0 - 0.5 * self.coeff * x * x
    }

    pub fn derivative(&self, x: f64) -> f64 {
        -self.coeff * x
    }
}

/// `1 − c(2n+1)/(4λ)`, the modified-norm correction.
fn brace_factor(level: &EnergyLevel, weight: &Weight) -> Result<f64> {
    let b = 1.0 - weight.coefficient() * (2.0 * level.n as f64 + 1.0) / (4.0 * level.lambda);
    if !(b > 0.0) {
        return Err(Error::Domain(format!(
            "normalization factor 1 - c(2n+1)/(4 lambda) = {b} is not positive (n = {})",
            level.n
        )));
    }
    Ok(b)
}

/// `C²` in log form: `½ ln λ − n ln 2 − ln n! − ½ ln π − ln B`.
pub fn ln_norm_const_sq(level: &EnergyLevel, params: &ModelParams) -> Result<f64> {
    let b = brace_factor(level, &Weight::for_level(params, level))?;
    Ok(0.5 * level.lambda.ln()
        - level.n as f64 * std::f64::consts::LN_2
        - ln_factorial(level.n)
        - 0.5 * PI.ln()
        - b.ln())
}

/// Normalization constant `C²`. Underflows to 0 past `n ≈ 150`; use
/// [`ln_norm_const_sq`] there.
pub fn norm_const_sq(level: &EnergyLevel, params: &ModelParams) -> Result<f64> {
    Ok(ln_norm_const_sq(level, params)?.exp())
}

/// Pointwise integrands of the three Fisher-information terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientTerms {
    /// `4 f ψ′²`
    pub kinetic: f64,
    /// `4 ψ ψ′ f′`
    pub cross: f64,
    /// `ψ² f′² / f`
    pub weight: f64,
}

impl GradientTerms {
    pub fn sum(&self) -> f64 {
        self.kinetic + self.cross + self.weight
    }
}

/// A level together with its weight and normalization: the density
/// `ρ_n(x) = |ψ_n(x)|² f(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedDensity {
    pub level: EnergyLevel,
    pub weight: Weight,
    brace: f64,
}

impl WeightedDensity {
    pub fn new(params: &ModelParams, n: u64) -> Result<Self> {
        Self::from_level(params, eigenvalue(params, n)?)
    }

    pub fn from_level(params: &ModelParams, level: EnergyLevel) -> Result<Self> {
        let weight = Weight::for_level(params, &level);
        let brace = brace_factor(&level, &weight)?;
        Ok(Self {
            level,
            weight,
            brace,
        })
    }

    /// `B = 1 − c(2n+1)/(4λ)`.
    pub fn brace_factor(&self) -> f64 {
        self.brace
    }

    /// `C² · 2ⁿ n! √π = √λ / B`, the squared amplitude of `ĥ_n`.
    fn amplitude_sq(&self) -> f64 {
        self.level.lambda.sqrt() / self.brace
    }

    fn scaled(&self, x: f64) -> f64 {
        self.level.lambda.sqrt() * x
    }

    pub fn psi(&self, x: f64) -> f64 {
        self.amplitude_sq().sqrt() * hermite_fn(self.level.n, self.scaled(x))
    }

    pub fn psi_derivative(&self, x: f64) -> f64 {
        let l = self.level.lambda;
        self.amplitude_sq().sqrt() * l.sqrt() * hermite_fn_derivative(self.level.n, self.scaled(x))
    }

    pub fn density(&self, x: f64) -> f64 {
        let h = hermite_fn(self.level.n, self.scaled(x));
        self.amplitude_sq() * h * h * self.weight.value(x)
    }

    /// `√f ψ`, whose square is the density. Carries the sign of `ψ`.
    pub fn weighted_amplitude(&self, x: f64) -> f64 {
        self.weight.value(x).sqrt() * self.psi(x)
    }

    pub fn gradient_terms(&self, x: f64) -> GradientTerms {
        let (h, h_prev) = hermite_pair(self.level.n, self.scaled(x));
        let y = self.scaled(x);
        let a = self.amplitude_sq().sqrt();
        let psi = a * h;
        let dpsi =
            a * self.level.lambda.sqrt() * ((2.0 * self.level.n as f64).sqrt() * h_prev - y * h);
        let f = self.weight.value(x);
        let df = self.weight.derivative(x);
        GradientTerms {
            kinetic: 4.0 * f * dpsi * dpsi,
            cross: 4.0 * psi * dpsi * df,
            weight: psi * psi * df * df / f,
        }
    }

    /// Half-width beyond which the Gaussian envelope is negligible:
    /// the classical turning point plus 8 in the scaled variable.
    pub fn half_width(&self) -> f64 {
        ((2.0 * self.level.n as f64 + 1.0).sqrt() + 8.0) / self.level.lambda.sqrt()
    }

    /// Integration setup sized to this level: window from
    /// [`half_width`](Self::half_width) and enough initial panels to
    /// resolve the `n` nodes.
    pub fn integration_spec(&self) -> IntegrationSpec {
        IntegrationSpec::precise()
            .with_window(Window::HalfWidth(self.half_width()))
            .with_initial_segments(2 * self.level.n as usize + 16)
    }

    /// `∫ ρ dx` by quadrature.
    pub fn total_probability(&self) -> Result<f64> {
        Ok(integrate(|x| self.density(x), &self.integration_spec())?.value)
    }
}

/// `ρ_n(x)` for the given level.
pub fn density(level: &EnergyLevel, params: &ModelParams, x: f64) -> Result<f64> {
    Ok(WeightedDensity::from_level(params, *level)?.density(x))
}

/// The three integrands `4fψ′²`, `4ψψ′f′`, `ψ²f′²/f` at `x`.
pub fn density_gradient_sq_terms(
    level: &EnergyLevel,
    params: &ModelParams,
    x: f64,
) -> Result<GradientTerms> {
    Ok(WeightedDensity::from_level(params, *level)?.gradient_terms(x))
}

/// Perey factor `√f(x)`.
pub fn perey_factor(weight: &Weight, x: f64) -> Result<f64> {
    let f = weight.value(x);
    if f < 0.0 {
        return Err(Error::Domain(format!(
            "1 - dV/dE = {f} is negative at x = {x}"
        )));
    }
    Ok(f.sqrt())
}

/// `∫ ψ_m ψ_n (1 − ΔV/ΔE) dx`, where `ΔV/ΔE` is the difference quotient
/// of the potential between the two levels in
/// [`DensityMode::NuConsistent`] and `γx²/2` in
/// [`DensityMode::GammaOnly`].
///
/// The difference-quotient weight makes distinct eigenfunctions exactly
/// orthogonal; for ν = 1 it coincides with `γx²/2`.
pub fn modified_overlap(params: &ModelParams, m: u64, n: u64) -> Result<f64> {
    let a = WeightedDensity::new(params, m)?;
    let b = WeightedDensity::new(params, n)?;
    let g = params.gamma();
    let coeff = match (params.density_mode(), params.case()) {
        (DensityMode::GammaOnly, _) | (DensityMode::NuConsistent, Case::Linear) => g,
        (DensityMode::NuConsistent, Case::Quadratic) => g * (a.level.energy + b.level.energy),
    };
    let weight = Weight::from_coefficient(coeff);
    let spec = IntegrationSpec::precise()
        .with_window(Window::HalfWidth(a.half_width().max(b.half_width())))
        .with_initial_segments(2 * m.max(n) as usize + 16);
    Ok(integrate(|x| a.psi(x) * b.psi(x) * weight.value(x), &spec)?.value)
}
