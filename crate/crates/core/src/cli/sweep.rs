//! Grid sweeps written as CSV plus a JSON manifest.
//!
//! Rows are computed in parallel and written in grid order (gamma, then
//! n, then β or x). Floats carry 17 significant digits. A failing row
//! keeps its key columns, leaves the value columns empty and reports
//! the error in the last column.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use super::spec::{density_mode_name, fisher_source_name, Output, SweepSpec};
use crate::error::{Error, Result};
use crate::information::{
    cramer_rao, entropy_density, fisher_closed, fisher_closed_literal, fisher_numeric, moments,
    second_moment_literal, shannon_entropy, FisherSource, ENTROPY_FLOOR,
};
use crate::quadrature::IntegrationSpec;
use crate::spectrum::{eigenvalue, relative_gap, saturation_limit, ModelParams};
use crate::thermo::{partition_function, reference_specific_heat};
use crate::wavefunction::{perey_factor, WeightedDensity};

/// What a sweep wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub files: Vec<PathBuf>,
    pub rows: usize,
    pub row_errors: usize,
    pub wall_seconds: f64,
}

pub(crate) fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn quote(message: &str) -> String {
    format!(
        "\"{}\"",
        message.replace('"', "\"\"").replace(['\n', '\r'], " ")
    )
}

struct Table {
    header: &'static [&'static str],
    rows: Vec<String>,
    errors: usize,
}

impl Table {
    fn new(header: &'static [&'static str]) -> Self {
        Table {
            header,
            rows: Vec::new(),
            errors: 0,
        }
    }

    /// `key` holds the leading columns; `values` fills the rest but the
    /// trailing error column.
    fn push(&mut self, key: Vec<String>, values: Result<Vec<String>>) {
        let width = self.header.len() - key.len() - 1;
        let mut cells = key;
        match values {
            Ok(v) => {
                debug_assert_eq!(v.len(), width);
                cells.extend(v);
                cells.push(String::new());
            }
            Err(e) => {
                self.errors += 1;
                cells.extend(std::iter::repeat_n(String::new(), width));
                cells.push(quote(&e.to_string()));
            }
        }
        self.rows.push(cells.join(","));
    }

    fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }
}

type Row = (Vec<String>, Result<Vec<String>>);

fn level_jobs(spec: &SweepSpec) -> Vec<(f64, u64)> {
    spec.gammas
        .iter()
        .flat_map(|&g| spec.levels().map(move |n| (g, n)))
        .collect()
}

fn level_key(spec: &SweepSpec, gamma: f64, n: u64) -> Vec<String> {
    vec![spec.case.nu().to_string(), num(gamma), n.to_string()]
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn spectrum_row(spec: &SweepSpec, gamma: f64, n: u64) -> Result<Vec<String>> {
    let p = spec.params(gamma)?;
    let level = eigenvalue(&p, n)?;
    // the accumulation point only exists for γ < 0
    let (limit, gap) = if gamma < 0.0 {
        (Some(saturation_limit(&p)?), Some(relative_gap(&p, n)?))
    } else {
        (None, None)
    };
    Ok(vec![
        num(level.energy),
        num(level.lambda),
        opt(limit),
        opt(gap),
    ])
}

fn thermo_row(spec: &SweepSpec, gamma: f64, beta: f64) -> Result<Vec<String>> {
    let p = spec.params(gamma)?;
    let t = partition_function(&p, beta, &spec.saturation_rule())?;
    Ok(vec![
        num(t.z),
        num(t.ln_z),
        num(t.u),
        num(t.cv),
        t.n_used.map(|n| n.to_string()).unwrap_or_default(),
        num(reference_specific_heat(beta)),
    ])
}

fn fisher_row(spec: &SweepSpec, gamma: f64, n: u64) -> Result<Vec<String>> {
    let p = spec.params(gamma)?;
    let level = eigenvalue(&p, n)?;
    let numeric = fisher_numeric(&level, &p)?;
    let closed = fisher_closed(&level, &p)?;
    let literal = fisher_closed_literal(&level, &p)?;
    Ok(vec![
        num(numeric),
        num(closed),
        num(literal),
        num((closed - numeric) / numeric),
    ])
}

fn cramer_rao_row(spec: &SweepSpec, gamma: f64, n: u64) -> Result<Vec<String>> {
    let p = spec.params(gamma)?;
    let level = eigenvalue(&p, n)?;
    let (fisher, variance) = match spec.fisher_source {
        FisherSource::Numeric => (fisher_numeric(&level, &p)?, moments(&level, &p)?.variance),
        FisherSource::Closed => (fisher_closed(&level, &p)?, moments(&level, &p)?.variance),
        FisherSource::Literal => (
            fisher_closed_literal(&level, &p)?,
            second_moment_literal(&level, &p)?,
        ),
    };
    let product = cramer_rao(&level, &p, spec.fisher_source)?;
    Ok(vec![
        fisher_source_name(spec.fisher_source).to_string(),
        num(fisher),
        num(variance),
        num(product),
    ])
}

fn shannon_row(spec: &SweepSpec, gamma: f64, n: u64) -> Result<Vec<String>> {
    let p = spec.params(gamma)?;
    Ok(vec![num(shannon_entropy(&eigenvalue(&p, n)?, &p)?)])
}

fn curve_rows(
    spec: &SweepSpec,
    gamma: f64,
    n: u64,
    xs: &[f64],
    point: impl Fn(&ModelParams, &WeightedDensity, f64) -> Result<Vec<String>>,
) -> Vec<Row> {
    let key = |x: f64| {
        let mut k = level_key(spec, gamma, n);
        k.push(num(x));
        k
    };
    let setup = spec
        .params(gamma)
        .and_then(|p| WeightedDensity::new(&p, n).map(|w| (p, w)));
    match setup {
        Ok((p, w)) => xs.iter().map(|&x| (key(x), point(&p, &w, x))).collect(),
        Err(e) => xs.iter().map(|&x| (key(x), Err(e.clone()))).collect(),
    }
}

fn density_point(p: &ModelParams, w: &WeightedDensity, x: f64) -> Result<Vec<String>> {
    Ok(vec![
        num(w.density(x)),
        num(entropy_density(&w.level, p, x)?),
        num(w.weighted_amplitude(x)),
    ])
}

fn perey_point(_: &ModelParams, w: &WeightedDensity, x: f64) -> Result<Vec<String>> {
    Ok(vec![num(perey_factor(&w.weight, x)?)])
}

fn per_level(
    spec: &SweepSpec,
    header: &'static [&'static str],
    f: impl Fn(&SweepSpec, f64, u64) -> Result<Vec<String>> + Sync,
) -> Table {
    let rows: Vec<Row> = level_jobs(spec)
        .into_par_iter()
        .map(|(g, n)| (level_key(spec, g, n), f(spec, g, n)))
        .collect();
    fill(header, rows)
}

fn per_point(
    spec: &SweepSpec,
    header: &'static [&'static str],
    point: fn(&ModelParams, &WeightedDensity, f64) -> Result<Vec<String>>,
) -> Table {
    let xs = spec.x_grid.points();
    let rows: Vec<Row> = level_jobs(spec)
        .into_par_iter()
        .flat_map_iter(|(g, n)| curve_rows(spec, g, n, &xs, point))
        .collect();
    fill(header, rows)
}

fn fill(header: &'static [&'static str], rows: Vec<Row>) -> Table {
    let mut t = Table::new(header);
    for (k, v) in rows {
        t.push(k, v);
    }
    t
}

fn build(spec: &SweepSpec, output: Output) -> Table {
    match output {
        Output::Spectrum => per_level(
            spec,
            &[
                "nu",
                "gamma",
                "n",
                "energy",
                "lambda",
                "saturation_limit",
                "relative_gap",
                "error",
            ],
            spectrum_row,
        ),
        Output::Thermo => {
            let jobs: Vec<(f64, f64)> = spec
                .gammas
                .iter()
                .flat_map(|&g| spec.beta_grid.points().into_iter().map(move |b| (g, b)))
                .collect();
            let rows: Vec<Row> = jobs
                .into_par_iter()
                .map(|(g, b)| {
                    let key = vec![spec.case.nu().to_string(), num(g), num(b)];
                    (key, thermo_row(spec, g, b))
                })
                .collect();
            fill(
                &[
                    "nu",
                    "gamma",
                    "beta",
                    "z",
                    "ln_z",
                    "u",
                    "cv",
                    "n_used",
                    "cv_reference",
                    "error",
                ],
                rows,
            )
        }
        Output::Fisher => per_level(
            spec,
            &[
                "nu",
                "gamma",
                "n",
                "fisher_numeric",
                "fisher_closed",
                "fisher_literal",
                "closed_relative_gap",
                "error",
            ],
            fisher_row,
        ),
        Output::CramerRao => per_level(
            spec,
            &[
                "nu",
                "gamma",
                "n",
                "source",
                "fisher",
                "variance",
                "cramer_rao",
                "error",
            ],
            cramer_rao_row,
        ),
        Output::Shannon => per_level(spec, &["nu", "gamma", "n", "shannon", "error"], shannon_row),
        Output::Density => per_point(
            spec,
            &[
                "nu",
                "gamma",
                "n",
                "x",
                "density",
                "entropy_density",
                "weighted_amplitude",
                "error",
            ],
            density_point,
        ),
        Output::Perey => per_point(
            spec,
            &["nu", "gamma", "n", "x", "perey", "error"],
            perey_point,
        ),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn manifest(
    spec: &SweepSpec,
    report: &SweepReport,
    per_file: &[(String, usize, usize)],
) -> serde_json::Value {
    let quad = IntegrationSpec::precise();
    let rule = spec.saturation_rule();
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "spec": {
            "nu": spec.case.nu(),
            "gamma": spec.gammas,
            "n_min": spec.n_min,
            "n_max": spec.n_max,
            "beta_grid": spec.beta_grid.to_string(),
            "x_grid": spec.x_grid.to_string(),
            "outputs": spec.outputs.iter().map(|o| o.name()).collect::<Vec<_>>(),
            "eps_sat": spec.eps_sat,
            "density_mode": density_mode_name(spec.density_mode),
            "fisher_source": fisher_source_name(spec.fisher_source),
            "permissive": spec.permissive,
        },
        "tolerances": {
            "quadrature_abs_tol": quad.abs_tol,
            "quadrature_rel_tol": quad.rel_tol,
            "quadrature_max_refinements": quad.max_refinements,
            "saturation_eps": rule.eps,
            "saturation_cap": rule.cap,
            "entropy_floor": ENTROPY_FLOOR,
        },
        "files": per_file.iter().map(|(f, rows, errors)| json!({
            "name": f, "rows": rows, "row_errors": errors,
        })).collect::<Vec<_>>(),
        "wall_time_seconds": report.wall_seconds,
    })
}

/// Computes every requested output and writes `<name>.csv` files and
/// `manifest.json` into `spec.out_dir`.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    spec.validate()?;
    let started = Instant::now();
    let dir = &spec.out_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut report = SweepReport {
        files: Vec::new(),
        rows: 0,
        row_errors: 0,
        wall_seconds: 0.0,
    };
    let mut per_file = Vec::new();
    for &output in &spec.outputs {
        let table = build(spec, output);
        let path = dir.join(output.file_name());
        write(&path, &table.render())?;
        report.rows += table.rows.len();
        report.row_errors += table.errors;
        per_file.push((output.file_name(), table.rows.len(), table.errors));
        report.files.push(path);
    }
    report.wall_seconds = started.elapsed().as_secs_f64();

    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest(spec, &report, &per_file)).map_err(|e| {
        Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    })?;
    write(&path, &(text + "\n"))?;
    report.files.push(path);
    Ok(report)
}
