//! Convergence and adaptivity experiments: test problems, the refinement
//! loop, CSV and gnuplot output, and key=value configuration files.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::amr::Forest;
use crate::assembly::{solve, Coefficients};
use crate::error::{Error, Result};
use crate::interpolation::{error_norms, AnalyticField};
use crate::mesh::{structured_hex_mesh_filtered, tetrahedralize};
use crate::space::FeSpace;
use crate::topology::Family;
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Problem {
    Unit2d,
    Unit3d,
    /// L-shaped domain with exponent `2n/3`.
    LShaped(u32),
    Fichera,
}

impl Problem {
    pub fn dim(&self) -> usize {
        match self {
            Problem::Unit2d | Problem::LShaped(_) => 2,
            Problem::Unit3d | Problem::Fichera => 3,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Problem::Unit2d => "unit2d".into(),
            Problem::Unit3d => "unit3d".into(),
            Problem::LShaped(n) => format!("lshaped{n}"),
            Problem::Fichera => "fichera".into(),
        }
    }

    /// Bounding box and the predicate selecting kept cells by center.
    pub fn domain(&self) -> (Vec3, Vec3, fn(&Vec3) -> bool) {
        match self {
            Problem::Unit2d | Problem::Unit3d => ([0.0; 3], [1.0; 3], |_| true),
            Problem::LShaped(_) => ([-1.0, -1.0, 0.0], [1.0, 1.0, 0.0], |c| !(c[0] > 0.0 && c[1] < 0.0)),
            Problem::Fichera => ([-1.0; 3], [1.0; 3], |c| !(c[0] < 0.0 && c[1] < 0.0 && c[2] < 0.0)),
        }
    }

    /// Default root cells per axis of the bounding box.
    pub fn default_initial(&self) -> usize {
        match self {
            Problem::Unit2d => 4,
            Problem::Unit3d => 2,
            Problem::LShaped(_) => 8,
            Problem::Fichera => 4,
        }
    }

    /// Exact solution and source for `alpha = beta = 1`.
    pub fn fields(&self) -> (AnalyticField, AnalyticField) {
        match self {
            Problem::Unit2d => manufactured_2d(),
            Problem::Unit3d => manufactured_3d(),
            Problem::LShaped(n) => {
                let u = lshaped_field(*n);
                let f = lshaped_field(*n);
                (u, f)
            }
            Problem::Fichera => (fichera_field(), fichera_field()),
        }
    }

    /// Predicted `H(curl)` convergence rate in `h` for order `k`.
    pub fn expected_rate(&self, k: usize) -> f64 {
        match self {
            Problem::Unit2d | Problem::Unit3d => k as f64,
            Problem::LShaped(n) => (2.0 * *n as f64 / 3.0).min(k as f64),
            Problem::Fichera => (2.0f64 / 3.0).min(k as f64),
        }
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "unit2d" => Ok(Problem::Unit2d),
            "unit3d" => Ok(Problem::Unit3d),
            "fichera" => Ok(Problem::Fichera),
            _ => {
                let rest = s.strip_prefix("lshaped").ok_or_else(|| bad_problem(&s))?;
                let rest = rest.trim_start_matches([':', '=', '-', '(']).trim_end_matches(')');
                if rest.is_empty() {
                    return Ok(Problem::LShaped(1));
                }
                let n: u32 = rest.parse().map_err(|_| bad_problem(&s))?;
                if n == 0 {
                    return Err(bad_problem(&s));
                }
                Ok(Problem::LShaped(n))
            }
        }
    }
}

fn bad_problem(s: &str) -> Error {
    Error::InvalidArgument(format!("unknown problem '{s}' (expected unit2d, unit3d, lshaped[N], fichera)"))
}

pub fn manufactured_2d() -> (AnalyticField, AnalyticField) {
    let u = AnalyticField::new(
        |x| [(PI * x[0]).cos() * (PI * x[1]).cos(), (PI * x[0]).sin() * (PI * x[1]).sin(), 0.0],
        |x| [0.0, 0.0, 2.0 * PI * (PI * x[0]).cos() * (PI * x[1]).sin()],
    );
    let s = 2.0 * PI * PI + 1.0;
    let f = AnalyticField::new(
        move |x| [s * (PI * x[0]).cos() * (PI * x[1]).cos(), s * (PI * x[0]).sin() * (PI * x[1]).sin(), 0.0],
        |_| [0.0; 3],
    );
    (u, f)
}

pub fn manufactured_3d() -> (AnalyticField, AnalyticField) {
    let trig = |x: &Vec3| {
        let c = [(PI * x[0]).cos(), (PI * x[1]).cos(), (PI * x[2]).cos()];
        let s = [(PI * x[0]).sin(), (PI * x[1]).sin(), (PI * x[2]).sin()];
        (c, s)
    };
    let u = AnalyticField::new(
        move |x| {
            let (c, s) = trig(x);
            [c[0] * c[1], s[1] * s[2], c[0] * c[2]]
        },
        move |x| {
            let (c, s) = trig(x);
            [-PI * s[1] * c[2], PI * s[0] * c[2], PI * c[0] * s[1]]
        },
    );
    let f = AnalyticField::new(
        move |x| {
            let (c, s) = trig(x);
            let a = PI * PI + 1.0;
            let b = PI * PI;
            [
                a * c[0] * c[1] + b * s[0] * s[2],
                a * s[1] * s[2] + b * s[0] * s[1],
                a * c[0] * c[2] + b * c[1] * c[2],
            ]
        },
        |_| [0.0; 3],
    );
    (u, f)
}

/// Gradient of `r^a sin(a theta)`, `a = 2n/3`, with `theta in [0, 2 pi)`.
pub fn lshaped_field(n: u32) -> AnalyticField {
    let a = 2.0 * n as f64 / 3.0;
    AnalyticField::new(
        move |x| {
            let r = x[0].hypot(x[1]);
            if r == 0.0 {
                return [0.0; 3];
            }
            let mut theta = x[1].atan2(x[0]);
            if theta < 0.0 {
                theta += 2.0 * PI;
            }
            let m = a * r.powf(a - 1.0);
            [m * ((a - 1.0) * theta).sin(), m * ((a - 1.0) * theta).cos(), 0.0]
        },
        |_| [0.0; 3],
    )
}

/// Gradient of `r^(2/3) sin(2t/3)` with `t = arccos(xyz / r)`.
pub fn fichera_field() -> AnalyticField {
    AnalyticField::new(
        |x| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            let r = r2.sqrt();
            if r == 0.0 {
                return [0.0; 3];
            }
            let p = x[0] * x[1] * x[2];
            let s = p / r;
            let t = s.acos();
            let grad_p = [x[1] * x[2], x[0] * x[2], x[0] * x[1]];
            let dr = 2.0 / 3.0 * r.powf(-1.0 / 3.0) * (2.0 * t / 3.0).sin();
            let dt = r.powf(2.0 / 3.0) * 2.0 / 3.0 * (2.0 * t / 3.0).cos();
            let ds = -1.0 / (1.0 - s * s).sqrt();
            let mut g = [0.0; 3];
            for i in 0..3 {
                let grad_s = grad_p[i] / r - p * x[i] / (r2 * r);
                g[i] = dr * x[i] / r + dt * ds * grad_s;
            }
            g
        },
        |_| [0.0; 3],
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Refinement {
    Uniform,
    /// Fraction of cells with the largest local `L2` error refined per step.
    Adaptive(f64),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub family: Family,
    pub order: usize,
    pub refinement: Refinement,
    pub steps: usize,
    pub tol: f64,
    /// Root cells per axis of the bounding box; problem default when `None`.
    pub initial: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(problem: Problem, family: Family, order: usize, refinement: Refinement, steps: usize) -> Self {
        ExperimentConfig { problem, family, order, refinement, steps, tol: 1e-10, initial: None, out: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidArgument("order must be at least 1".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("solver tolerance must be positive".into()));
        }
        if let Refinement::Adaptive(f) = self.refinement {
            if self.family != Family::Cube {
                return Err(Error::InvalidArgument("adaptive refinement requires hex cells".into()));
            }
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidArgument(format!("mark fraction must be in (0, 1], got {f}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub step: usize,
    /// Largest cell edge length.
    pub h: f64,
    /// Unconstrained DOFs, Dirichlet DOFs included.
    pub n_dofs: usize,
    pub n_cells: usize,
    pub l2_error: f64,
    pub hcurl_error: f64,
    pub iterations: usize,
}

/// Cells to refine: the `ceil(fraction * n)` largest errors, ties broken by
/// ascending cell index.
pub fn mark_cells(errors: &[f64], fraction: f64) -> Vec<usize> {
    let count = ((fraction * errors.len() as f64).ceil() as usize).clamp(1, errors.len());
    let mut idx: Vec<usize> = (0..errors.len()).collect();
    idx.sort_by(|&a, &b| errors[b].total_cmp(&errors[a]).then(a.cmp(&b)));
    idx.truncate(count);
    idx.sort_unstable();
    idx
}

fn record(space: &FeSpace, step: usize, exact: &AnalyticField, f: &AnalyticField, cfg: &ExperimentConfig) -> Result<(ConvergenceRecord, Vec<f64>)> {
    let (uh, stats) = solve(space, &Coefficients::unit(), &|x| f.value(x), Some(&|x| exact.value(x)), cfg.tol)?;
    let extra = match cfg.problem {
        Problem::LShaped(_) | Problem::Fichera => 4,
        _ => 2,
    };
    let e = error_norms(space, &uh, exact, extra)?;
    let h = (0..space.n_cells())
        .map(|c| {
            let m = &space.mesh.maps[c];
            (0..space.mesh.dim()).map(|j| (0..3).map(|i| m.a[i][j].powi(2)).sum::<f64>().sqrt()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let rec = ConvergenceRecord {
        step,
        h,
        n_dofs: space.n_dofs() - space.constraints.len(),
        n_cells: space.n_cells(),
        l2_error: e.l2,
        hcurl_error: e.hcurl,
        iterations: stats.iterations,
    };
    Ok((rec, e.cell_l2_sq))
}

/// Runs the solve / estimate / mark / refine loop and writes the CSV and
/// gnuplot script when an output directory is set. On a solver failure the
/// records computed so far are still written.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRecord>> {
    cfg.validate()?;
    let (exact, f) = cfg.problem.fields();
    let (lo, hi, keep) = cfg.problem.domain();
    let d = cfg.problem.dim();
    let n0 = cfg.initial.unwrap_or(cfg.problem.default_initial());
    let mut records = Vec::new();
    let result = (|| -> Result<()> {
        match cfg.refinement {
            Refinement::Uniform => {
                for step in 0..cfg.steps {
                    let n = vec![n0 << step; d];
                    let hex = structured_hex_mesh_filtered(&n, lo, hi, &keep)?;
                    let mesh = if cfg.family == Family::Cube { hex } else { tetrahedralize(&hex)? };
                    let space = FeSpace::conforming(&mesh, cfg.order, true)?;
                    records.push(record(&space, step, &exact, &f, cfg)?.0);
                }
            }
            Refinement::Adaptive(fraction) => {
                let mut forest = Forest::new(&vec![n0; d], lo, hi, &keep)?;
                for step in 0..cfg.steps {
                    let space = FeSpace::on_forest(&forest, cfg.order, true)?;
                    let (rec, errs) = record(&space, step, &exact, &f, cfg)?;
                    records.push(rec);
                    if step + 1 < cfg.steps {
                        let leaves = space.leaves.as_ref().expect("forest space");
                        let marked: Vec<_> = mark_cells(&errs, fraction).into_iter().map(|c| leaves[c]).collect();
                        forest.refine(&marked)?;
                    }
                }
            }
        }
        Ok(())
    })();
    if let Some(dir) = &cfg.out {
        write_outputs(dir, cfg, &records)?;
    }
    result.map(|_| records)
}

/// Least-squares slope of `log y` against `log x`.
pub fn slope_fit(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope through the last two points.
pub fn slope_last_two(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    slope_fit(&x[n - 2..], &y[n - 2..])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slopes {
    pub l2_last: f64,
    pub hcurl_last: f64,
    pub l2_fit: f64,
    pub hcurl_fit: f64,
}

/// Rates in `h` (uniform) or in `n_dofs^(1/d)` (adaptive); positive when
/// errors decrease.
pub fn slopes(records: &[ConvergenceRecord], dim: usize, by_dofs: bool) -> Option<Slopes> {
    if records.len() < 2 {
        return None;
    }
    let x: Vec<f64> = records
        .iter()
        .map(|r| if by_dofs { (r.n_dofs as f64).powf(-1.0 / dim as f64) } else { r.h })
        .collect();
    let l2: Vec<f64> = records.iter().map(|r| r.l2_error).collect();
    let hc: Vec<f64> = records.iter().map(|r| r.hcurl_error).collect();
    Some(Slopes {
        l2_last: slope_last_two(&x, &l2),
        hcurl_last: slope_last_two(&x, &hc),
        l2_fit: slope_fit(&x, &l2),
        hcurl_fit: slope_fit(&x, &hc),
    })
}

pub fn csv(records: &[ConvergenceRecord]) -> String {
    let mut s = String::from("step,h,n_dofs,n_cells,l2_error,hcurl_error,iterations\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{:.6e},{},{},{:.10e},{:.10e},{}",
            r.step, r.h, r.n_dofs, r.n_cells, r.l2_error, r.hcurl_error, r.iterations
        );
    }
    s
}

pub fn file_stem(cfg: &ExperimentConfig) -> String {
    let cell = if cfg.family == Family::Cube { "hex" } else { "tet" };
    let mode = match cfg.refinement {
        Refinement::Uniform => "uniform".to_string(),
        Refinement::Adaptive(_) => "adaptive".to_string(),
    };
    format!("{}_{cell}_k{}_{mode}", cfg.problem.name(), cfg.order)
}

pub fn gnuplot_script(cfg: &ExperimentConfig, csv_name: &str) -> String {
    let (xcol, xlabel) = match cfg.refinement {
        Refinement::Uniform => ("2", "h"),
        Refinement::Adaptive(_) => ("3", "number of DOFs"),
    };
    let stem = file_stem(cfg);
    format!(
        "set datafile separator ','\nset logscale xy\nset key bottom right\nset xlabel '{xlabel}'\nset ylabel 'error'\n\
         set terminal pngcairo size 800,600\nset output '{stem}.png'\n\
         plot '{csv_name}' every ::1 using {xcol}:5 with linespoints title 'L2', \\\n     \
         '{csv_name}' every ::1 using {xcol}:6 with linespoints title 'H(curl)'\n"
    )
}

fn write_outputs(dir: &Path, cfg: &ExperimentConfig, records: &[ConvergenceRecord]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let stem = file_stem(cfg);
    let csv_name = format!("{stem}.csv");
    std::fs::write(dir.join(&csv_name), csv(records))?;
    std::fs::write(dir.join(format!("{stem}.gp")), gnuplot_script(cfg, &csv_name))?;
    Ok(())
}

/// Parses `key = value` lines; `#` starts a comment. Keys use the long flag
/// names without dashes, e.g. `mark-fraction = 0.05`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected key = value, got '{line}'") })?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(Error::Parse { line: i + 1, msg: "empty key".into() });
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}
