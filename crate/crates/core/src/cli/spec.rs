//! Sweep configuration: grids, output selection, the key-value config
//! file and the merge of file settings with command-line flags.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::information::FisherSource;
use crate::spectrum::{Case, DensityMode, ModelParams, SaturationRule};

/// Evenly spaced points `start:stop:count`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        let g = Grid { start, stop, count };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParams(
                "grid must have at least one point".into(),
            ));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidParams(format!(
                "grid bounds must be finite: {self}"
            )));
        }
        if self.count > 1 && !(self.start < self.stop) {
            return Err(Error::InvalidParams(format!(
                "grid must be increasing: {self}"
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + i as f64 * step
                }
            })
            .collect()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [a, b, c] = parts[..] else {
            return Err(format!("expected start:stop:count, got '{s}'"));
        };
        let start = a
            .parse::<f64>()
            .map_err(|e| format!("bad grid start '{a}': {e}"))?;
        let stop = b
            .parse::<f64>()
            .map_err(|e| format!("bad grid stop '{b}': {e}"))?;
        let count = c
            .parse::<usize>()
            .map_err(|e| format!("bad grid count '{c}': {e}"))?;
        Grid::new(start, stop, count).map_err(|e| e.to_string())
    }
}

/// One CSV file of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Output {
    Spectrum,
    Thermo,
    Fisher,
    CramerRao,
    Shannon,
    Density,
    Perey,
}

impl Output {
    pub const ALL: [Output; 7] = [
        Output::Spectrum,
        Output::Thermo,
        Output::Fisher,
        Output::CramerRao,
        Output::Shannon,
        Output::Density,
        Output::Perey,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Output::Spectrum => "spectrum",
            Output::Thermo => "thermo",
            Output::Fisher => "fisher",
            Output::CramerRao => "cramer_rao",
            Output::Shannon => "shannon",
            Output::Density => "density",
            Output::Perey => "perey",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.name())
    }
}

impl FromStr for Output {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let key = s.trim().replace('-', "_");
        Output::ALL
            .into_iter()
            .find(|o| o.name() == key)
            .ok_or_else(|| format!("unknown output '{s}'"))
    }
}

impl FromStr for DensityMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "paper" | "gamma-only" => Ok(DensityMode::GammaOnly),
            "nu-consistent" => Ok(DensityMode::NuConsistent),
            other => Err(format!(
                "unknown density mode '{other}' (gamma-only, paper, nu-consistent)"
            )),
        }
    }
}

impl FromStr for FisherSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "numeric" => Ok(FisherSource::Numeric),
            "closed" => Ok(FisherSource::Closed),
            "literal" => Ok(FisherSource::Literal),
            other => Err(format!(
                "unknown Fisher source '{other}' (numeric, closed, literal)"
            )),
        }
    }
}

pub(crate) fn density_mode_name(mode: DensityMode) -> &'static str {
    match mode {
        DensityMode::GammaOnly => "gamma-only",
        DensityMode::NuConsistent => "nu-consistent",
    }
}

pub(crate) fn fisher_source_name(source: FisherSource) -> &'static str {
    match source {
        FisherSource::Numeric => "numeric",
        FisherSource::Closed => "closed",
        FisherSource::Literal => "literal",
    }
}

/// A fully resolved, validated sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub case: Case,
    pub gammas: Vec<f64>,
    pub n_min: u64,
    pub n_max: u64,
    pub beta_grid: Grid,
    pub x_grid: Grid,
    pub outputs: BTreeSet<Output>,
    pub eps_sat: f64,
    pub density_mode: DensityMode,
    pub fisher_source: FisherSource,
    pub permissive: bool,
    pub out_dir: PathBuf,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            case: Case::Linear,
            gammas: vec![0.0, -1e-5, -0.1, -0.5, -1.0],
            n_min: 0,
            n_max: 20,
            beta_grid: Grid {
                start: 0.05,
                stop: 10.0,
                count: 200,
            },
            x_grid: Grid {
                start: -8.0,
                stop: 8.0,
                count: 321,
            },
            outputs: Output::ALL.into_iter().collect(),
            eps_sat: SaturationRule::default().eps,
            density_mode: DensityMode::GammaOnly,
            fisher_source: FisherSource::Numeric,
            permissive: false,
            out_dir: PathBuf::from("edho-out"),
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() {
            return Err(Error::InvalidParams("gamma list is empty".into()));
        }
        for &g in &self.gammas {
            if !g.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "gamma must be finite, got {g}"
                )));
            }
            if g > 0.0 && !self.permissive {
                return Err(Error::InvalidParams(format!(
                    "gamma = {g} > 0 violates 1 - dV/dE > 0; pass --permissive to explore it"
                )));
            }
        }
        if self.n_min > self.n_max {
            return Err(Error::InvalidParams(format!(
                "empty n range {}..={}",
                self.n_min, self.n_max
            )));
        }
        self.beta_grid.validate()?;
        if !(self.beta_grid.start > 0.0) {
            return Err(Error::InvalidParams("beta grid must be positive".into()));
        }
        self.x_grid.validate()?;
        if self.outputs.is_empty() {
            return Err(Error::InvalidParams("no outputs selected".into()));
        }
        if !(self.eps_sat > 0.0 && self.eps_sat < 1.0) {
            return Err(Error::InvalidParams(format!(
                "eps_sat must lie in (0, 1), got {}",
                self.eps_sat
            )));
        }
        Ok(())
    }

    pub fn params(&self, gamma: f64) -> Result<ModelParams> {
        let p = if self.permissive {
            ModelParams::permissive(gamma, self.case)?
        } else {
            ModelParams::new(gamma, self.case)?
        };
        Ok(p.with_density_mode(self.density_mode))
    }

    pub fn saturation_rule(&self) -> SaturationRule {
        SaturationRule::with_eps(self.eps_sat)
    }

    pub fn levels(&self) -> impl Iterator<Item = u64> + Clone {
        self.n_min..=self.n_max
    }
}

/// Partially specified settings, from flags or from a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub nu: Option<u8>,
    pub gammas: Option<Vec<f64>>,
    pub n_min: Option<u64>,
    pub n_max: Option<u64>,
    pub beta_grid: Option<Grid>,
    pub x_grid: Option<Grid>,
    pub outputs: Option<Vec<Output>>,
    pub eps_sat: Option<f64>,
    pub density_mode: Option<DensityMode>,
    pub fisher_source: Option<FisherSource>,
    pub permissive: Option<bool>,
    pub out_dir: Option<PathBuf>,
}

fn parse_list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("'{s}': {e}")))
        .collect()
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| Error::InvalidParams(format!("{key}: {e}")))
}

impl Settings {
    /// Parses `key = value` lines. `#` starts a comment; keys may use
    /// `-` or `_`.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidParams(format!(
                    "config line {}: expected key = value",
                    lineno + 1
                )));
            };
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            let list_err = |e: String| Error::InvalidParams(format!("{key}: {e}"));
            match key.as_str() {
                "nu" => s.nu = Some(parse_value(&key, value)?),
                "gamma" => s.gammas = Some(parse_list(value).map_err(list_err)?),
                "n_min" => s.n_min = Some(parse_value(&key, value)?),
                "n_max" => s.n_max = Some(parse_value(&key, value)?),
                "beta_grid" => s.beta_grid = Some(parse_value(&key, value)?),
                "x_grid" => s.x_grid = Some(parse_value(&key, value)?),
                "outputs" => s.outputs = Some(parse_list(value).map_err(list_err)?),
                "eps_sat" => s.eps_sat = Some(parse_value(&key, value)?),
                "density_mode" => s.density_mode = Some(parse_value(&key, value)?),
                "fisher_source" => s.fisher_source = Some(parse_value(&key, value)?),
                "permissive" => s.permissive = Some(parse_value(&key, value)?),
                "out" => s.out_dir = Some(PathBuf::from(value)),
                _ => {
                    return Err(Error::InvalidParams(format!(
                        "config line {}: unknown key '{key}'",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(s)
    }

    pub fn from_config_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_config(&text)
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            nu: self.nu.or(base.nu),
            gammas: self.gammas.or(base.gammas),
            n_min: self.n_min.or(base.n_min),
            n_max: self.n_max.or(base.n_max),
            beta_grid: self.beta_grid.or(base.beta_grid),
            x_grid: self.x_grid.or(base.x_grid),
            outputs: self.outputs.or(base.outputs),
            eps_sat: self.eps_sat.or(base.eps_sat),
            density_mode: self.density_mode.or(base.density_mode),
            fisher_source: self.fisher_source.or(base.fisher_source),
            permissive: self.permissive.or(base.permissive),
            out_dir: self.out_dir.or(base.out_dir),
        }
    }

    /// Fills gaps from [`SweepSpec::default`] and validates.
    pub fn resolve(self) -> Result<SweepSpec> {
        let d = SweepSpec::default();
        let case = match self.nu {
            Some(nu) => Case::try_from(nu)?,
            None => d.case,
        };
        let spec = SweepSpec {
            case,
            gammas: self.gammas.unwrap_or(d.gammas),
            n_min: self.n_min.unwrap_or(d.n_min),
            n_max: self.n_max.unwrap_or(d.n_max),
            beta_grid: self.beta_grid.unwrap_or(d.beta_grid),
            x_grid: self.x_grid.unwrap_or(d.x_grid),
            outputs: self
                .outputs
                .map(|o| o.into_iter().collect())
                .unwrap_or(d.outputs),
            eps_sat: self.eps_sat.unwrap_or(d.eps_sat),
            density_mode: self.density_mode.unwrap_or(d.density_mode),
            fisher_source: self.fisher_source.unwrap_or(d.fisher_source),
            permissive: self.permissive.unwrap_or(d.permissive),
            out_dir: self.out_dir.unwrap_or(d.out_dir),
        };
        spec.validate()?;
        Ok(spec)
    }
}
