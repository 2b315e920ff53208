//! Adaptive Gauss-Kronrod (G7/K15) integration on a symmetric window,
//! plus closed-form Gaussian-Hermite moments.
//!
//! All integrands handled here decay like a Gaussian, so the real line
//! is truncated to `[-L, L]`. `L` is either given or found by probing the
//! integrand outward until it stays below `1e-13` of its running peak.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae; odd indices are the Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const PROBE_STEP: f64 = 0.125;
const PROBE_THRESHOLD: f64 = 1e-13;
const PROBE_LIMIT: f64 = 1e6;

/// Truncation of the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// Probe the integrand for its extent.
    Auto,
    /// Integrate over `[-L, L]`.
    HalfWidth(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub window: Window,
    /// Maximum number of bisections.
    pub max_refinements: usize,
    /// Panels the window is split into before adaptation starts.
    pub initial_segments: usize,
}

impl Default for IntegrationSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            window: Window::Auto,
            max_refinements: 10_000,
            initial_segments: 16,
        }
    }
}

impl IntegrationSpec {
    /// Tolerances used when checking closed forms against quadrature.
    pub fn precise() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            ..Self::default()
        }
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn with_initial_segments(mut self, segments: usize) -> Self {
        self.initial_segments = segments.max(1);
        self
    }

    fn validate(&self) -> Result<()> {
        let ok_tol = self.abs_tol >= 0.0
            && self.rel_tol >= 0.0
            && (self.abs_tol > 0.0 || self.rel_tol > 0.0);
        if !ok_tol {
            return Err(Error::InvalidParams(
                "tolerances must be non-negative and not both zero".into(),
            ));
        }
        if let Window::HalfWidth(l) = self.window {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "window half-width must be positive, got {l}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// One K15 panel. Returns the panel and whether it may still be refined:
/// panels whose Gauss/Kronrod difference is at round-off level are not.
fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (Panel, bool) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let diff = ((kronrod - gauss) * half).abs();
    let roundoff = 50.0 * f64::EPSILON * abs_sum * half.abs();
    let too_narrow = half.abs() <= 1e3 * f64::EPSILON * center.abs().max(1.0);
    let refinable = diff > roundoff && !too_narrow;
    (
        Panel {
            a,
            b,
            value,
            error: diff.max(roundoff),
        },
        refinable,
    )
}

/// Adaptive integration over `[a, b]`.
pub fn integrate_interval<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &IntegrationSpec,
) -> Result<Integral> {
    spec.validate()?;
    let segments = spec.initial_segments.max(1);
    let width = (b - a) / segments as f64;

    let mut active = BinaryHeap::new();
    let mut settled = Vec::new();
    let mut active_error = 0.0;
    let mut total_value = 0.0;

    for i in 0..segments {
        let lo = a + width * i as f64;
        let hi = if i + 1 == segments {
            b
        } else {
            a + width * (i + 1) as f64
        };
        let (panel, refinable) = kronrod_panel(&f, lo, hi);
        total_value += panel.value;
        place(
            panel,
            refinable,
            &mut active,
            &mut settled,
            &mut active_error,
        );
    }

    let mut refinements = 0;
    loop {
        let target = spec.abs_tol.max(spec.rel_tol * total_value.abs());
        if active_error <= target {
            break;
        }
        let Some(worst) = active.pop() else { break };
        if refinements >= spec.max_refinements {
            active.push(worst);
            let (value, error_estimate) = summarize(active.iter().chain(settled.iter()));
            return Err(Error::NonConvergence {
                value,
                error_estimate,
                refinements,
            });
        }
        refinements += 1;
        active_error -= worst.error;
        total_value -= worst.value;
        let mid = 0.5 * (worst.a + worst.b);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (panel, refinable) = kronrod_panel(&f, lo, hi);
            total_value += panel.value;
            place(
                panel,
                refinable,
                &mut active,
                &mut settled,
                &mut active_error,
            );
        }
    }

    let (value, error_estimate) = summarize(active.iter().chain(settled.iter()));
    if !value.is_finite() {
        return Err(Error::NonConvergence {
            value,
            error_estimate,
            refinements,
        });
    }
    Ok(Integral {
        value,
        error_estimate,
    })
}

fn place(
    panel: Panel,
    refinable: bool,
    active: &mut BinaryHeap<Panel>,
    settled: &mut Vec<Panel>,
    active_error: &mut f64,
) {
    if refinable {
        *active_error += panel.error;
        active.push(panel);
    } else {
        settled.push(panel);
    }
}

/// Sum panels in position order so the result does not depend on
/// heap layout.
fn summarize<'a>(panels: impl Iterator<Item = &'a Panel>) -> (f64, f64) {
    let mut all: Vec<&Panel> = panels.collect();
    all.sort_by(|p, q| p.a.total_cmp(&q.a));
    all.iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
}

/// Integrate `f` over the real line, truncated according to `spec.window`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, spec: &IntegrationSpec) -> Result<Integral> {
    spec.validate()?;
    let half_width = match spec.window {
        Window::HalfWidth(l) => l,
        Window::Auto => auto_half_width(&f),
    };
    integrate_interval(f, -half_width, half_width, spec)
}

/// Extent of a Gaussian-decaying integrand.
///
/// Walks outward from 0 in steps of 1/8 and records the last abscissa where
/// `max(|f(x)|, |f(-x)|)` exceeds `1e-13` of the peak seen so far. The walk
/// continues to twice that distance before stopping; the returned half-width
/// adds a 25% margin plus 2.
pub fn auto_half_width<F: Fn(f64) -> f64>(f: &F) -> f64 {
    let mut peak = f(0.0).abs();
    if !peak.is_finite() {
        peak = 0.0;
    }
    let mut last_significant = 0.0;
    let mut k = 1u64;
    loop {
        let x = k as f64 * PROBE_STEP;
        let v = f(x).abs().max(f(-x).abs());
        if v.is_finite() {
            peak = peak.max(v);
            if v > PROBE_THRESHOLD * peak {
                last_significant = x;
            }
        }
        if (x >= 8.0 && x > 2.0 * last_significant + 4.0) || x > PROBE_LIMIT {
            break;
        }
        k += 1;
    }
    1.25 * last_significant + 2.0
}

/// `∫ e^{-y²} yᵏ H_n(y)² dy / (2ⁿ n! √π)` for `k ∈ {0, 2, 4}`.
pub fn gaussian_moment(n: u64, k: u32) -> Result<f64> {
    let n = n as f64;
    match k {
        0 => Ok(1.0),
        2 => Ok(n + 0.5),
        4 => Ok(0.75 * (2.0 * n * n + 2.0 * n + 1.0)),
        _ => Err(Error::Unsupported(format!(
            "Gaussian-Hermite moment of order {k}; only 0, 2 and 4 are available"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunction::hermite_fn;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gaussian_integrals() {
        let spec = IntegrationSpec::default();
        let r = integrate(|y: f64| (-y * y).exp(), &spec).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-10);
        assert!(r.error_estimate <= 1e-8 * r.value);

        // H_1 = 2y
        let r = integrate(|y: f64| (-y * y).exp() * y * y * 4.0 * y * y, &spec).unwrap();
        assert!((r.value - 3.0 * PI.sqrt()).abs() < 1e-8);

        // H_2 = 4y² − 2
        let r = integrate(
            |y: f64| {
                let h2 = 4.0 * y * y - 2.0;
                (-y * y).exp() * h2 * h2
            },
            &spec,
        )
        .unwrap();
        assert!((r.value - 8.0 * PI.sqrt()).abs() < 1e-8);
        assert!((r.value - 14.179630).abs() < 1e-6);
    }

    #[test]
    fn moment_examples() {
        assert_eq!(gaussian_moment(0, 2).unwrap(), 0.5);
        assert_eq!(gaussian_moment(3, 2).unwrap(), 3.5);
        assert_eq!(gaussian_moment(2, 4).unwrap(), 9.75);
        assert_eq!(gaussian_moment(7, 0).unwrap(), 1.0);
        assert!(matches!(gaussian_moment(1, 3), Err(Error::Unsupported(_))));
        assert!(matches!(gaussian_moment(1, 6), Err(Error::Unsupported(_))));
    }

    #[test]
    fn moments_match_quadrature() {
        for n in 0..=100u64 {
            let spec = IntegrationSpec::precise().with_initial_segments(2 * n as usize + 16);
            for k in [0u32, 2, 4] {
                let r = integrate(
                    |y: f64| {
                        let h = hermite_fn(n, y);
                        y.powi(k as i32) * h * h
                    },
                    &spec,
                )
                .unwrap();
                let closed = gaussian_moment(n, k).unwrap();
                assert!(
                    rel(r.value, closed) < 1e-10,
                    "n={n} k={k}: {} vs {closed}",
                    r.value
                );
            }
        }
    }

    #[test]
    fn doubling_auto_window_is_stable() {
        for n in [0u64, 3, 10, 40] {
            let f = |y: f64| {
                let h = hermite_fn(n, y);
                y * y * h * h
            };
            let l = auto_half_width(&f);
            let spec = IntegrationSpec::precise().with_initial_segments(2 * n as usize + 16);
            let a = integrate(f, &spec.with_window(Window::HalfWidth(l))).unwrap();
            let b = integrate(
                f,
                &spec
                    .with_window(Window::HalfWidth(2.0 * l))
                    .with_initial_segments(4 * n as usize + 32),
            )
            .unwrap();
            assert!(
                rel(a.value, b.value) < 1e-12,
                "n={n}: {} vs {}",
                a.value,
                b.value
            );
        }
    }

    #[test]
    fn odd_integrands_cancel() {
        let spec = IntegrationSpec::precise();
        let r = integrate(|y: f64| y * (-y * y).exp(), &spec).unwrap();
        assert!(r.value.abs() < 1e-12);
        let r = integrate(
            |y: f64| y.powi(3) * (1.0 + y * y).ln() * (-y * y).exp(),
            &spec,
        )
        .unwrap();
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn linearity() {
        let spec = IntegrationSpec::precise().with_window(Window::HalfWidth(12.0));
        let f = |y: f64| (-y * y).exp() * (1.0 + y * y);
        let g = |y: f64| (-0.5 * y * y).exp() * y.cos();
        let a = integrate(f, &spec).unwrap().value;
        let b = integrate(g, &spec).unwrap().value;
        let c = integrate(|y| 2.0 * f(y) - 3.0 * g(y), &spec).unwrap().value;
        assert!((c - (2.0 * a - 3.0 * b)).abs() < 1e-12);
    }

    #[test]
    fn finite_interval_matches_antiderivative() {
        let r = integrate_interval(|x: f64| x.sin(), 0.0, PI, &IntegrationSpec::precise()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn flags_non_convergence() {
        let spec = IntegrationSpec {
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            window: Window::HalfWidth(1.0),
            max_refinements: 3,
            initial_segments: 1,
        };
        let err = integrate(|x: f64| (50.0 * x).sin().abs(), &spec).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { refinements: 3, .. }));
    }

    #[test]
    fn deterministic() {
        let f = |y: f64| (-y * y).exp() * (3.0 * y).cos().powi(2);
        let spec = IntegrationSpec::precise();
        let a = integrate(f, &spec).unwrap();
        let b = integrate(f, &spec).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.error_estimate.to_bits(), b.error_estimate.to_bits());
    }

    #[test]
    fn rejects_bad_spec() {
        let spec = IntegrationSpec {
            window: Window::HalfWidth(-1.0),
            ..IntegrationSpec::default()
        };
        assert!(integrate(|x: f64| x, &spec).is_err());
    }
}
