//! Oracle checks over a sweep grid.

use std::fmt;

use rayon::prelude::*;

use super::spec::SweepSpec;
use crate::error::Result;
use crate::information::{fisher_numeric, moments, moments_numeric};
use crate::spectrum::{eigenvalue, residual};
use crate::wavefunction::WeightedDensity;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Check {
            name,
            max_error: 0.0,
            tolerance,
            cases: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, case: &str, outcome: &Result<f64>) {
        self.cases += 1;
        match outcome {
            Ok(err) => {
                self.max_error = self.max_error.max(*err);
                if !(*err <= self.tolerance) {
                    self.failures.push(format!("{case}: error {err:.3e}"));
                }
            }
            Err(e) => self.failures.push(format!("{case}: {e}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {:<14} max error {:.3e} (tolerance {:.0e}, {} cases)",
                if c.passed() { "PASS" } else { "FAILED" },
                c.name,
                c.max_error,
                c.tolerance,
                c.cases
            )?;
            for line in c.failures.iter().take(5) {
                writeln!(f, "    {line}")?;
            }
            if c.failures.len() > 5 {
                writeln!(f, "    ... {} more", c.failures.len() - 5)?;
            }
        }
        Ok(())
    }
}

/// Per-level outcomes, in the order of the checks.
struct Outcomes([Result<f64>; 6]);

const CHECKS: [(&str, f64); 6] = [
    ("residual", 1e-10),
    ("normalization", 1e-8),
    ("mean", 1e-10),
    ("second_moment", 1e-8),
    ("cramer_rao", 1e-10),
    ("positivity", 0.0),
];

/// Fails with the offending interval when `f(x) = 1 − (c/2)x²` turns
/// negative inside the window.
fn positivity(w: &WeightedDensity, x_max: f64) -> Result<f64> {
    let c = w.weight.coefficient();
    let edge = if c > 0.0 {
        (2.0 / c).sqrt()
    } else {
        f64::INFINITY
    };
    if edge < x_max {
        return Err(crate::Error::Domain(format!(
            "density negative for |x| > {edge:.6} (window |x| <= {x_max:.3})"
        )));
    }
    Ok(0.0)
}

fn evaluate(spec: &SweepSpec, gamma: f64, n: u64) -> Outcomes {
    let setup = spec.params(gamma).and_then(|p| {
        let level = eigenvalue(&p, n)?;
        Ok((p, level))
    });
    let (p, level) = match setup {
        Ok(v) => v,
        Err(e) => return Outcomes(std::array::from_fn(|_| Err(e.clone()))),
    };
    let h = level.half_index();
    let res = Ok((residual(&p, n, level.energy) / (h * h)).abs());
    let density = WeightedDensity::from_level(&p, level);
    let norm = density
        .clone()
        .and_then(|w| w.total_probability())
        .map(|t| (t - 1.0).abs());
    let numeric = moments_numeric(&level, &p);
    let closed = moments(&level, &p);
    let mean = numeric.clone().map(|m| m.mean_x.abs());
    let second = match (&numeric, &closed) {
        (Ok(a), Ok(b)) => Ok(((a.second_moment - b.second_moment) / b.second_moment).abs()),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    let cr = fisher_numeric(&level, &p).and_then(|f| {
        let v = closed.clone()?.variance;
        Ok((1.0 - f * v).max(0.0))
    });
    let x_max = spec.x_grid.start.abs().max(spec.x_grid.stop.abs());
    let pos = density.and_then(|w| positivity(&w, x_max.max(w.half_width())));
    Outcomes([res, norm, mean, second, cr, pos])
}

/// Runs residual, normalization, moment, Cramér-Rao and positivity
/// checks for every (gamma, n) of the spec. Output selection is ignored.
pub fn validate(spec: &SweepSpec) -> Result<ValidationReport> {
    spec.validate()?;
    let jobs: Vec<(f64, u64)> = spec
        .gammas
        .iter()
        .flat_map(|&g| spec.levels().map(move |n| (g, n)))
        .collect();
    let outcomes: Vec<Outcomes> = jobs
        .par_iter()
        .map(|&(g, n)| evaluate(spec, g, n))
        .collect();
    let mut checks: Vec<Check> = CHECKS
        .iter()
        .map(|&(name, tol)| Check::new(name, tol))
        .collect();
    for ((g, n), Outcomes(results)) in jobs.iter().zip(&outcomes) {
        let case = format!("gamma={g}, n={n}");
        for (check, r) in checks.iter_mut().zip(results) {
            check.record(&case, r);
        }
    }
    Ok(ValidationReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::spec::Settings;

    #[test]
    fn default_spec_passes() {
        let report = validate(&SweepSpec::default()).unwrap();
        assert!(report.passed(), "{report}");
        assert!(report.check("normalization").unwrap().max_error < 1e-8);
        assert_eq!(report.checks.len(), 6);
    }

    #[test]
    fn positive_coupling_flags_positivity() {
        let spec = SweepSpec {
            gammas: vec![0.5],
            n_max: 2,
            permissive: true,
            ..SweepSpec::default()
        };
        let report = validate(&spec).unwrap();
        assert!(!report.passed());
        let pos = report.check("positivity").unwrap();
        assert!(!pos.passed());
        assert!(pos.failures[0].contains("|x| > 2.0"), "{}", pos.failures[0]);
        assert!(report.to_string().contains("[FAILED] positivity"));
    }

    #[test]
    fn empty_range_is_rejected_up_front() {
        let spec = SweepSpec {
            n_min: 3,
            n_max: 1,
            ..SweepSpec::default()
        };
        assert!(validate(&spec).is_err());
        let s = Settings {
            n_min: Some(3),
            n_max: Some(1),
            ..Settings::default()
        };
        assert!(s.resolve().is_err());
    }
}
