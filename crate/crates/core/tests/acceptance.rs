//! Acceptance criteria, one line per criterion. Run with
//! `cargo test -p edho --test acceptance`.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use edho::cli::{run_sweep, Grid, Output, SweepSpec};
use edho::information::{cramer_rao, fisher_closed, fisher_numeric, shannon_entropy, FisherSource};
use edho::spectrum::{eigenvalue, residual};
use edho::thermo::{partition_function, reference_specific_heat, specific_heat_curve};
use edho::wavefunction::{perey_factor, Weight};
use edho::{Case, DensityMode, ModelParams, SaturationRule, WeightedDensity};

type Outcome = Result<String, String>;

const CASES: [Case; 2] = [Case::Linear, Case::Quadratic];
const MODES: [DensityMode; 2] = [DensityMode::GammaOnly, DensityMode::NuConsistent];

fn params(gamma: f64, case: Case) -> ModelParams {
    ModelParams::new(gamma, case).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Runner {
    failed: usize,
}

impl Runner {
    fn run(&mut self, id: u32, title: &str, budget: Duration, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > budget => Err(format!("runtime {elapsed:.2?} exceeds {budget:?}")),
            o => o,
        };
        let timing = format!("{:.3}s / {}s", elapsed.as_secs_f64(), budget.as_secs_f64());
        match outcome {
            Ok(detail) => println!("[PASS] {id:>2} {title} ({timing}): {detail}"),
            Err(detail) => {
                self.failed += 1;
                println!("[FAIL] {id:>2} {title} ({timing}): {detail}");
            }
        }
    }
}

fn weak_coupling_recovery() -> Outcome {
    let p = params(-1e-5, Case::Linear);
    let mut worst: f64 = 0.0;
    for n in 0..=10 {
        let e = eigenvalue(&p, n).map_err(|e| e.to_string())?.energy;
        worst = worst.max((e - (n as f64 + 0.5)).abs());
    }
    ensure(worst < 1e-3, || {
        format!("max |E_n - (n+1/2)| = {worst:.3e}")
    })?;
    Ok(format!("max |E_n - (n+1/2)| = {worst:.3e}"))
}

fn saturation_limits() -> Outcome {
    let mut parts = Vec::new();
    for (gamma, case, limit) in [(-2.0, Case::Linear, 0.5), (-0.25, Case::Quadratic, 2.0)] {
        let e = eigenvalue(&params(gamma, case), 200)
            .map_err(|e| e.to_string())?
            .energy;
        let rel = (e - limit).abs() / limit;
        ensure(rel < 1e-3, || {
            format!("gamma={gamma}: E_200 = {e}, relative deviation {rel:.3e}")
        })?;
        parts.push(format!("E_200 = {e:.6} -> {limit} (rel {rel:.1e})"));
    }
    Ok(parts.join("; "))
}

fn characteristic_residual() -> Outcome {
    let mut worst: f64 = 0.0;
    for case in CASES {
        for gamma in [-0.1, -0.5, -1.0, -2.0] {
            let p = params(gamma, case);
            for n in 0..=500 {
                let level = eigenvalue(&p, n).map_err(|e| e.to_string())?;
                let h = level.half_index();
                worst = worst.max((residual(&p, n, level.energy) / (h * h)).abs());
            }
        }
    }
    ensure(worst < 1e-10, || format!("max scaled residual {worst:.3e}"))?;
    Ok(format!("max scaled residual {worst:.3e}"))
}

fn normalization() -> Outcome {
    let mut worst: f64 = 0.0;
    for case in CASES {
        for mode in MODES {
            for gamma in [0.0, -0.1, -0.5, -1.0] {
                let p = params(gamma, case).with_density_mode(mode);
                for n in 0..=50 {
                    let total = WeightedDensity::new(&p, n)
                        .and_then(|w| w.total_probability())
                        .map_err(|e| format!("gamma={gamma}, n={n}: {e}"))?;
                    worst = worst.max((total - 1.0).abs());
                }
            }
        }
    }
    ensure(worst < 1e-8, || format!("max |norm - 1| = {worst:.3e}"))?;
    Ok(format!(
        "max |norm - 1| = {worst:.3e} over both weight modes"
    ))
}

fn fisher_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for case in CASES {
        for mode in MODES {
            for gamma in [-0.1, -0.05, -0.01, -1e-3, -1e-5] {
                let p = params(gamma, case).with_density_mode(mode);
                for n in 0..=5 {
                    let level = eigenvalue(&p, n).map_err(|e| e.to_string())?;
                    let numeric = fisher_numeric(&level, &p).map_err(|e| e.to_string())?;
                    let closed = fisher_closed(&level, &p).map_err(|e| e.to_string())?;
                    let rel = ((closed - numeric) / numeric).abs();
                    ensure(rel < 1e-2, || {
                        format!(
                            "nu={}, gamma={gamma}, n={n}: relative gap {rel:.3e}",
                            case.nu()
                        )
                    })?;
                    worst = worst.max(rel);
                }
            }
        }
    }
    let mut exact: f64 = 0.0;
    for case in CASES {
        let p = params(0.0, case);
        for n in 0..=5 {
            let level = eigenvalue(&p, n).map_err(|e| e.to_string())?;
            let target = 2.0 * (2 * n + 1) as f64;
            let closed = fisher_closed(&level, &p).map_err(|e| e.to_string())?;
            let numeric = fisher_numeric(&level, &p).map_err(|e| e.to_string())?;
            exact = exact
                .max((closed - target).abs())
                .max((numeric - target).abs());
        }
    }
    ensure(exact < 1e-8, || {
        format!("gamma=0 deviation from 2(2n+1): {exact:.3e}")
    })?;
    Ok(format!(
        "max relative gap {worst:.3e}; gamma=0 deviation {exact:.1e}"
    ))
}

fn cramer_rao_bound() -> Outcome {
    let mut min_product = f64::INFINITY;
    let mut exact: f64 = 0.0;
    let mut cases = 0;
    for case in CASES {
        for mode in MODES {
            for gamma in [0.0, -1e-5, -0.1, -0.3, -0.5, -1.0, -2.0] {
                let p = params(gamma, case).with_density_mode(mode);
                for n in 0..=30 {
                    let level = eigenvalue(&p, n).map_err(|e| e.to_string())?;
                    let cr =
                        cramer_rao(&level, &p, FisherSource::Numeric).map_err(|e| e.to_string())?;
                    ensure(cr >= 1.0 - 1e-10, || {
                        format!("nu={}, gamma={gamma}, n={n}: F*V = {cr}", case.nu())
                    })?;
                    min_product = min_product.min(cr);
                    cases += 1;
                    if gamma == 0.0 {
                        let target = ((2 * n + 1) as f64).powi(2);
                        exact = exact.max((cr - target).abs());
                    }
                }
            }
        }
    }
    ensure(exact < 1e-8, || {
        format!("gamma=0 deviation from (2n+1)^2: {exact:.3e}")
    })?;
    Ok(format!(
        "{cases} cases, min F*V = {min_product:.12}, gamma=0 deviation {exact:.1e}"
    ))
}

fn shannon_reference() -> Outcome {
    let p = params(0.0, Case::Linear);
    let level = eigenvalue(&p, 0).map_err(|e| e.to_string())?;
    let s = shannon_entropy(&level, &p).map_err(|e| e.to_string())?;
    let target = 0.5 * (1.0 + std::f64::consts::PI.ln());
    let err = (s - target).abs();
    ensure(err < 1e-6, || format!("S = {s}, expected {target}"))?;
    Ok(format!("S = {s:.10} (error {err:.1e})"))
}

fn thermodynamics() -> Outcome {
    let rule = SaturationRule::default();
    let betas: Vec<f64> = (0..=190).map(|i| 0.5 + 0.05 * i as f64).collect();
    let weak = specific_heat_curve(&params(-1e-5, Case::Linear), &betas, &rule)
        .map_err(|e| e.to_string())?;
    let worst = weak
        .iter()
        .map(|t| (t.cv - reference_specific_heat(t.beta)).abs())
        .fold(0.0, f64::max);
    ensure(worst < 1e-2, || {
        format!("gamma=-1e-5: max |Cv - reference| = {worst:.3e}")
    })?;

    let strong = params(-0.5, Case::Linear);
    let grid: Vec<f64> = (0..=100)
        .map(|i| 10f64.powf(-3.0 + 5.0 * i as f64 / 100.0))
        .collect();
    let curve = specific_heat_curve(&strong, &grid, &rule).map_err(|e| e.to_string())?;
    let (peak_at, peak) = curve
        .iter()
        .enumerate()
        .map(|(i, t)| (i, t.cv))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let hot = curve[0].cv;
    let cold = curve[curve.len() - 1].cv;
    ensure(peak_at > 0 && peak_at < curve.len() - 1, || {
        format!("Cv maximum at grid edge {peak_at}")
    })?;
    ensure(hot < 1e-3 * peak && cold < 1e-3 * peak, || {
        format!(
            "Cv ends not small: beta=1e-3 -> {hot:.3e}, beta=1e2 -> {cold:.3e}, peak {peak:.3e}"
        )
    })?;
    // direct evaluation far beyond the grid ends
    let far_hot = partition_function(&strong, 1e-6, &rule)
        .map_err(|e| e.to_string())?
        .cv;
    let far_cold = partition_function(&strong, 1e3, &rule)
        .map_err(|e| e.to_string())?
        .cv;
    ensure(far_hot < 1e-6 && far_cold < 1e-6, || {
        format!("Cv limits {far_hot:.3e}, {far_cold:.3e}")
    })?;
    Ok(format!(
        "weak-coupling max error {worst:.3e}; gamma=-0.5 peak Cv = {peak:.4} at beta = {:.3}, Cv(1e-6) = {far_hot:.1e}, Cv(1e3) = {far_cold:.1e}",
        curve[peak_at].beta
    ))
}

fn perey() -> Outcome {
    let mut samples = 0;
    for case in CASES {
        for mode in MODES {
            for gamma in [-1e-5, -0.1, -0.5, -1.0, -2.0] {
                let p = params(gamma, case).with_density_mode(mode);
                for n in [0, 1, 5, 20] {
                    let level = eigenvalue(&p, n).map_err(|e| e.to_string())?;
                    let w = Weight::for_level(&p, &level);
                    let at_origin = perey_factor(&w, 0.0).map_err(|e| e.to_string())?;
                    ensure(at_origin == 1.0, || format!("sqrt f(0) = {at_origin}"))?;
                    for i in -400..=400 {
                        let x = i as f64 * 0.025;
                        let v = perey_factor(&w, x).map_err(|e| e.to_string())?;
                        ensure(v >= 1.0, || format!("gamma={gamma}, n={n}, x={x}: {v}"))?;
                        samples += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{samples} samples >= 1, equal to 1 at x = 0"))
}

fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| {
            header
                .iter()
                .cloned()
                .zip(l.split(',').map(String::from))
                .collect()
        })
        .collect()
}

fn column(rows: &[BTreeMap<String, String>], name: &str) -> Vec<f64> {
    rows.iter()
        .map(|r| r[name].parse::<f64>().unwrap())
        .collect()
}

fn group_by(
    rows: &[BTreeMap<String, String>],
    key: &str,
) -> BTreeMap<String, Vec<BTreeMap<String, String>>> {
    let mut out: BTreeMap<String, Vec<_>> = BTreeMap::new();
    for r in rows {
        out.entry(r[key].clone()).or_default().push(r.clone());
    }
    out
}

fn figure_shapes() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = SweepSpec::default();
    let mut notes = Vec::new();

    // spectrum: monotone, plateau at the accumulation point
    let dir = root.path().join("spectrum");
    run_sweep(&SweepSpec {
        gammas: vec![-1e-5, -0.5, -2.0],
        n_max: 100,
        outputs: [Output::Spectrum].into(),
        out_dir: dir.clone(),
        ..base.clone()
    })
    .map_err(|e| e.to_string())?;
    let rows = read_csv(&dir.join("spectrum.csv"));
    for (g, rows) in group_by(&rows, "gamma") {
        let e = column(&rows, "energy");
        ensure(e.windows(2).all(|w| w[1] > w[0]), || {
            format!("spectrum gamma={g} not increasing")
        })?;
        let gamma: f64 = g.parse().unwrap();
        let limit = column(&rows, "saturation_limit")[0];
        let last = e[e.len() - 1];
        if gamma <= -0.5 {
            let gap = (limit - last) / limit;
            let step = (last - e[e.len() - 2]) / limit;
            ensure(gap < 1e-3 && step < 1e-4, || {
                format!("gamma={g}: no plateau (gap {gap:.2e}, step {step:.2e})")
            })?;
            notes.push(format!("gamma={gamma}: E_100/Gamma = {:.6}", last / limit));
        } else {
            ensure((last - 100.5).abs() < 0.1, || {
                format!("weak coupling E_100 = {last}")
            })?;
        }
    }

    // Fisher information growing with n
    let dir = root.path().join("fisher");
    run_sweep(&SweepSpec {
        gammas: vec![0.0, -0.01, -0.1, -0.3, -0.5, -1.0],
        n_max: 20,
        outputs: [Output::Fisher].into(),
        out_dir: dir.clone(),
        ..base.clone()
    })
    .map_err(|e| e.to_string())?;
    let rows = read_csv(&dir.join("fisher.csv"));
    let mut turnovers = Vec::new();
    for (g, rows) in group_by(&rows, "gamma") {
        let literal = column(&rows, "fisher_literal");
        ensure(literal.windows(2).all(|w| w[1] >= w[0]), || {
            format!("fisher_literal gamma={g} decreases")
        })?;
        let numeric = column(&rows, "fisher_numeric");
        let turn = numeric.windows(2).position(|w| w[1] < w[0]);
        // the exact integral must grow wherever the closed form is valid
        let gamma: f64 = g.parse().unwrap();
        ensure(gamma < -0.1 || turn.is_none(), || {
            format!("fisher_numeric gamma={g} decreases")
        })?;
        if let Some(i) = turn {
            turnovers.push(format!("{gamma}@n={i}"));
        }
    }
    notes.push(format!(
        "literal F non-decreasing; quadrature F non-decreasing for |gamma| <= 0.1, turns over at {}",
        if turnovers.is_empty() { "none".into() } else { turnovers.join(" ") }
    ));

    // entropy monotone in gamma at fixed n
    let dir = root.path().join("shannon");
    let gammas = vec![-1.0, -0.7, -0.5, -0.3, -0.1, -0.03, -0.01, -1e-3, -1e-5];
    run_sweep(&SweepSpec {
        gammas,
        n_max: 10,
        outputs: [Output::Shannon].into(),
        out_dir: dir.clone(),
        ..base.clone()
    })
    .map_err(|e| e.to_string())?;
    let rows = read_csv(&dir.join("shannon.csv"));
    let mut directions = BTreeMap::new();
    for (n, rows) in group_by(&rows, "n") {
        let mut pairs: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r["gamma"].parse().unwrap(), r["shannon"].parse().unwrap()))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let s: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let up = s.windows(2).all(|w| w[1] > w[0]);
        let down = s.windows(2).all(|w| w[1] < w[0]);
        ensure(up || down, || {
            format!("S_x not monotone in gamma at n={n}: {s:?}")
        })?;
        *directions
            .entry(if down { "decreasing" } else { "increasing" })
            .or_insert(0) += 1;
    }
    notes.push(format!("S_x vs gamma (towards 0): {directions:?}"));

    // densities even with n nodes
    let dir = root.path().join("density");
    run_sweep(&SweepSpec {
        gammas: vec![-1e-5, -0.5, -1.0],
        n_max: 6,
        x_grid: Grid::new(-12.0, 12.0, 2401).map_err(|e| e.to_string())?,
        outputs: [Output::Density].into(),
        out_dir: dir.clone(),
        ..base.clone()
    })
    .map_err(|e| e.to_string())?;
    let rows = read_csv(&dir.join("density.csv"));
    let mut curves: BTreeMap<(String, String), Vec<BTreeMap<String, String>>> = BTreeMap::new();
    for r in rows {
        curves
            .entry((r["gamma"].clone(), r["n"].clone()))
            .or_default()
            .push(r);
    }
    for ((g, n), rows) in &curves {
        let rho = column(rows, "density");
        let amp = column(rows, "weighted_amplitude");
        let m = rho.len();
        let peak = rho.iter().cloned().fold(0.0, f64::max);
        for i in 0..m / 2 {
            ensure((rho[i] - rho[m - 1 - i]).abs() <= 1e-12 * peak, || {
                format!("gamma={g}, n={n}: density not even")
            })?;
        }
        let signs: Vec<f64> = amp
            .iter()
            .filter(|a| a.abs() > 1e-12)
            .map(|a| a.signum())
            .collect();
        let nodes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        ensure(nodes.to_string() == *n, || {
            format!("gamma={g}, n={n}: {nodes} nodes")
        })?;
    }
    notes.push(format!("{} density curves even with n nodes", curves.len()));
    Ok(notes.join("; "))
}

fn main() {
    let mut r = Runner { failed: 0 };
    let s = Duration::from_secs;
    r.run(
        1,
        "weak-coupling spectrum recovery",
        s(1),
        weak_coupling_recovery,
    );
    r.run(2, "saturation limits", s(1), saturation_limits);
    r.run(
        3,
        "characteristic-equation residual",
        s(5),
        characteristic_residual,
    );
    r.run(4, "modified-norm correctness", s(30), normalization);
    r.run(
        5,
        "Fisher closed form vs quadrature",
        s(30),
        fisher_equivalence,
    );
    r.run(6, "Cramer-Rao bound", s(60), cramer_rao_bound);
    r.run(7, "Shannon reference point", s(1), shannon_reference);
    r.run(8, "thermodynamics", s(10), thermodynamics);
    r.run(9, "Perey factor", s(1), perey);
    r.run(10, "figure-shape reproduction", s(120), figure_shapes);
    if r.failed > 0 {
        println!("{} acceptance criteria failed", r.failed);
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
