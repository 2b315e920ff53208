//! Position-space information measures of the weighted density
//! `ρ_n(x) = |ψ_n(x)|² f(x)`: Fisher information, variance, the
//! Cramér-Rao product and Shannon entropy.
//!
//! Closed forms are written in terms of `λ`, `n`, the brace factor
//! `B = 1 − c(2n+1)/(4λ)` and the weight coefficient `c` of
//! `f(x) = 1 − (c/2)x²`. They rest on the Gaussian-Hermite moments
//! `⟨y²⟩ = n + ½`, `⟨y⁴⟩ = ¾(2n² + 2n + 1)` and
//! `⟨y² ĥ′²⟩ = (2n² + 2n + 3)/4`.

use crate::error::{Error, Result};
use crate::quadrature::{gaussian_moment, integrate};
use crate::spectrum::{eigenvalue, EnergyLevel, ModelParams};
use crate::wavefunction::WeightedDensity;

/// Densities at or below this value contribute nothing to the entropy.
pub const ENTROPY_FLOOR: f64 = f64::MIN_POSITIVE;

/// Which Fisher information enters the Cramér-Rao product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FisherSource {
    /// Quadrature of the exact integrand.
    #[default]
    Numeric,
    /// [`fisher_closed`].
    Closed,
    /// [`fisher_closed_literal`] together with [`second_moment_literal`].
    Literal,
}

struct ClosedFormInputs {
    n: f64,
    lambda: f64,
    coeff: f64,
    brace: f64,
}

fn closed_inputs(level: &EnergyLevel, params: &ModelParams) -> Result<ClosedFormInputs> {
    let w = WeightedDensity::from_level(params, *level)?;
    Ok(ClosedFormInputs {
        n: level.n as f64,
        lambda: level.lambda,
        coeff: w.weight.coefficient(),
        brace: w.brace_factor(),
    })
}

/// Fisher information in closed form.
///
/// The kinetic term `∫4fψ′²` and the cross term `∫4ψψ′f′ = 2c/B` are
/// exact. The weight term `c²∫ψ²x²/f = (c²/λB)⟨y²/(1 − (c/2λ)y²)⟩` is
/// replaced by `⟨y²⟩/(1 − (c/2λ)⟨y⁴⟩/⟨y²⟩)`, which matches its first-order
/// expansion and, by Jensen's inequality, never exceeds it for `c ≤ 0`.
/// That keeps the result positive at strong coupling. It reduces to
/// `2(2n+1)` at `γ = 0`.
pub fn fisher_closed(level: &EnergyLevel, params: &ModelParams) -> Result<f64> {
    let ClosedFormInputs {
        n,
        lambda: l,
        coeff: c,
        brace,
    } = closed_inputs(level, params)?;
    let y2 = gaussian_moment(level.n, 2)?;
    let y4 = gaussian_moment(level.n, 4)?;
    let kinetic = 4.0 * l * y2 - 0.5 * c * (2.0 * n * n + 2.0 * n + 3.0);
    let cross = 2.0 * c;
    let shrink = 1.0 - c / (2.0 * l) * y4 / y2;
    if shrink <= 0.0 {
        return Err(Error::Domain(format!(
            "weight-term resummation breaks down for n = {}, c = {c}",
            level.n
        )));
    }
    let weight = c * c / l * y2 / shrink;
    Ok((kinetic + cross + weight) / brace)
}

/// The literal closed form:
///
/// ```text
/// B⁻¹ {4λ(n+½) − 4nc − (c/2)[(2n+1)²+2] + 2c + c²(n+½)/λ − c³[(2n+1)²+2]/(8λ²)}
/// ```
///
/// It uses `[(2n+1)²+2]/4` for `⟨y⁴⟩` and the opposite sign in the
/// expansion of `1/f`, so it only agrees with quadrature at `n = 0` or
/// `γ → 0`. Kept to reproduce curves drawn from it.
pub fn fisher_closed_literal(level: &EnergyLevel, params: &ModelParams) -> Result<f64> {
    let ClosedFormInputs {
        n,
        lambda: l,
        coeff: c,
        brace,
    } = closed_inputs(level, params)?;
    let h = n + 0.5;
    let q = (2.0 * n + 1.0).powi(2) + 2.0;
    let body = 4.0 * l * h - 4.0 * n * c - 0.5 * c * q + 2.0 * c + c * c * h / l
        - c * c * c * q / (8.0 * l * l);
    Ok(body / brace)
}

/// `∫ ρ (d ln ρ/dx)² dx` by quadrature of `4fψ′² + 4ψψ′f′ + ψ²f′²/f`.
pub fn fisher_numeric(level: &EnergyLevel, params: &ModelParams) -> Result<f64> {
    let w = WeightedDensity::from_level(params, *level)?;
    Ok(integrate(|x| w.gradient_terms(x).sum(), &w.integration_spec())?.value)
}

/// First and second moments of position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionMoments {
    pub mean_x: f64,
    pub second_moment: f64,
    pub variance: f64,
}

/// Closed-form moments. `⟨x⟩ = 0` by parity and
///
/// ```text
/// ⟨x²⟩ = [(n+½) − (c/2λ)·¾(2n²+2n+1)] / (λB)
/// ```
pub fn moments(level: &EnergyLevel, params: &ModelParams) -> Result<PositionMoments> {
    let ClosedFormInputs {
        lambda: l,
        coeff: c,
        brace,
        ..
    } = closed_inputs(level, params)?;
    let y2 = gaussian_moment(level.n, 2)?;
    let y4 = gaussian_moment(level.n, 4)?;
    let second = (y2 - c / (2.0 * l) * y4) / (l * brace);
    Ok(PositionMoments {
        mean_x: 0.0,
        second_moment: second,
        variance: second,
    })
}

/// `⟨x²⟩ = (2n+1)/(2λ) B⁻¹ {1 − (c/4λ)[(2n+1)²+2]/(2n+1)}`, the commonly
/// quoted form. Exact only for `n = 0`; see [`fisher_closed_literal`].
pub fn second_moment_literal(level: &EnergyLevel, params: &ModelParams) -> Result<f64> {
    let ClosedFormInputs {
        n,
        lambda: l,
        coeff: c,
        brace,
    } = closed_inputs(level, params)?;
    let m = 2.0 * n + 1.0;
    Ok(m / (2.0 * l) / brace * (1.0 - c / (4.0 * l) * (m * m + 2.0) / m))
}

/// Moments by quadrature of `x ρ` and `x² ρ`.
pub fn moments_numeric(level: &EnergyLevel, params: &ModelParams) -> Result<PositionMoments> {
    let w = WeightedDensity::from_level(params, *level)?;
    let spec = w.integration_spec();
    let mean_x = integrate(|x| x * w.density(x), &spec)?.value;
    let second_moment = integrate(|x| x * x * w.density(x), &spec)?.value;
    Ok(PositionMoments {
        mean_x,
        second_moment,
        variance: second_moment - mean_x * mean_x,
    })
}

/// Cramér-Rao product `F · V`.
pub fn cramer_rao(level: &EnergyLevel, params: &ModelParams, source: FisherSource) -> Result<f64> {
    Ok(match source {
        FisherSource::Numeric => fisher_numeric(level, params)? * moments(level, params)?.variance,
        FisherSource::Closed => fisher_closed(level, params)? * moments(level, params)?.variance,
        FisherSource::Literal => {
            fisher_closed_literal(level, params)? * second_moment_literal(level, params)?
        }
    })
}

/// `ρ ln ρ`, taken as 0 where `ρ` is at or below `floor`.
fn entropy_integrand(rho: f64, floor: f64) -> f64 {
    if rho.is_nan() || rho < 0.0 {
        f64::NAN
    } else if rho <= floor {
        0.0
    } else {
        rho * rho.ln()
    }
}

/// Entropy density `ρ ln ρ` at `x`; 0 where `ρ = 0`, NaN where `ρ < 0`.
pub fn entropy_density(level: &EnergyLevel, params: &ModelParams, x: f64) -> Result<f64> {
    let w = WeightedDensity::from_level(params, *level)?;
    Ok(entropy_integrand(w.density(x), 0.0))
}

/// Shannon entropy `−∫ ρ ln ρ dx`.
pub fn shannon_entropy(level: &EnergyLevel, params: &ModelParams) -> Result<f64> {
    shannon_entropy_with_floor(level, params, ENTROPY_FLOOR)
}

/// [`shannon_entropy`] with an explicit cutoff for the `ρ ln ρ → 0`
/// convention.
pub fn shannon_entropy_with_floor(
    level: &EnergyLevel,
    params: &ModelParams,
    floor: f64,
) -> Result<f64> {
    if !(floor >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "entropy floor must be non-negative, got {floor}"
        )));
    }
    let w = WeightedDensity::from_level(params, *level)?;
    let r = integrate(
        |x| -entropy_integrand(w.density(x), floor),
        &w.integration_spec(),
    )?;
    if r.value.is_nan() {
        return Err(Error::Domain(
            "density is negative inside the integration window".into(),
        ));
    }
    Ok(r.value)
}

/// Every measure for one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoMeasures {
    pub n: u64,
    pub gamma: f64,
    pub fisher_closed: f64,
    pub fisher_literal: f64,
    pub fisher_numeric: f64,
    pub mean_x: f64,
    pub second_moment: f64,
    pub variance: f64,
    /// `fisher_numeric · variance`.
    pub cramer_rao: f64,
    pub shannon: f64,
}

pub fn info_measures(params: &ModelParams, n: u64) -> Result<InfoMeasures> {
    let level = eigenvalue(params, n)?;
    let m = moments(&level, params)?;
    let fisher_numeric = fisher_numeric(&level, params)?;
    Ok(InfoMeasures {
        n,
        gamma: params.gamma(),
        fisher_closed: fisher_closed(&level, params)?,
        fisher_literal: fisher_closed_literal(&level, params)?,
        fisher_numeric,
        mean_x: m.mean_x,
        second_moment: m.second_moment,
        variance: m.variance,
        cramer_rao: fisher_numeric * m.variance,
        shannon: shannon_entropy(&level, params)?,
    })
}
