use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nedelec::amr::Forest;
use nedelec::element::ReferenceElement;
use nedelec::harness::{self, ConvergenceRecord, ExperimentConfig, Problem, Refinement};
use nedelec::mesh::{structured_hex_mesh_filtered, tetrahedralize, write_ascii, write_vtk, Mesh};
use nedelec::topology::{CellKind, Family};
use nedelec::{Error, Result};

#[derive(Parser)]
#[command(name = "nedelec", version, about = "Nedelec edge elements: convergence and adaptivity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Uniform refinement study.
    Converge(Opts),
    /// Adaptive refinement driven by the per-cell L2 error.
    Adapt(Opts),
    /// Tabulate reference shape functions as CSV.
    DumpElement(Opts),
    /// Write the problem mesh (ASCII and VTK).
    DumpMesh(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum CellArg {
    Hex,
    Tet,
}

#[derive(Args, Clone, Default)]
struct Opts {
    /// key=value file with the same keys as the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// unit2d, unit3d, lshaped[N] or fichera.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, value_enum)]
    cell: Option<CellArg>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    mark_fraction: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Root cells per axis of the bounding box.
    #[arg(long)]
    initial: Option<usize>,
    /// Spatial dimension for dump-element.
    #[arg(long)]
    dim: Option<usize>,
    /// Exit nonzero unless the observed rates match the predicted ones.
    #[arg(long)]
    assert_slopes: bool,
}

fn value<T: std::str::FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    file.get(key)
        .map(|v| v.parse::<T>().map_err(|_| Error::InvalidArgument(format!("bad value '{v}' for {key}"))))
        .transpose()
}

impl Opts {
    /// Command-line flags override config-file entries.
    fn merged(mut self) -> Result<Self> {
        let Some(path) = &self.config else { return Ok(self) };
        let file = harness::parse_config(&std::fs::read_to_string(path)?)?;
        for key in file.keys() {
            let known = [
                "problem", "cell", "order", "steps", "mark-fraction", "tol", "out", "seed", "initial", "dim",
                "assert-slopes",
            ];
            if !known.contains(&key.as_str()) {
                return Err(Error::InvalidArgument(format!("unknown config key '{key}'")));
            }
        }
        self.problem = self.problem.or(value(&file, "problem")?);
        if self.cell.is_none() {
            self.cell = match file.get("cell").map(String::as_str) {
                None => None,
                Some("hex") => Some(CellArg::Hex),
                Some("tet") => Some(CellArg::Tet),
                Some(v) => return Err(Error::InvalidArgument(format!("bad value '{v}' for cell"))),
            };
        }
        self.order = self.order.or(value(&file, "order")?);
        self.steps = self.steps.or(value(&file, "steps")?);
        self.mark_fraction = self.mark_fraction.or(value(&file, "mark-fraction")?);
        self.tol = self.tol.or(value(&file, "tol")?);
        self.out = self.out.or(value(&file, "out")?);
        self.seed = self.seed.or(value(&file, "seed")?);
        self.initial = self.initial.or(value(&file, "initial")?);
        self.dim = self.dim.or(value(&file, "dim")?);
        self.assert_slopes |= value::<bool>(&file, "assert-slopes")?.unwrap_or(false);
        Ok(self)
    }

    fn problem(&self) -> Result<Problem> {
        self.problem.as_deref().unwrap_or("unit2d").parse()
    }

    fn family(&self) -> Family {
        match self.cell {
            Some(CellArg::Tet) => Family::Simplex,
            _ => Family::Cube,
        }
    }

    fn experiment(&self, refinement: Refinement) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(self.problem()?, self.family(), self.order.unwrap_or(1), refinement, self.steps.unwrap_or(4));
        cfg.tol = self.tol.unwrap_or(cfg.tol);
        cfg.initial = self.initial;
        cfg.out = self.out.clone();
        Ok(cfg)
    }
}

fn print_table(records: &[ConvergenceRecord]) {
    println!("{:>4} {:>10} {:>9} {:>8} {:>13} {:>13} {:>6}", "step", "h", "dofs", "cells", "L2", "Hcurl", "iters");
    for r in records {
        println!(
            "{:>4} {:>10.4e} {:>9} {:>8} {:>13.6e} {:>13.6e} {:>6}",
            r.step, r.h, r.n_dofs, r.n_cells, r.l2_error, r.hcurl_error, r.iterations
        );
    }
}

fn check(name: &str, got: f64, want: f64, tol: f64) -> bool {
    let ok = (got - want).abs() <= tol;
    println!("check {name}: {got:.3} vs {want:.3} +- {tol} {}", if ok { "ok" } else { "FAILED" });
    ok
}

fn converge(opts: &Opts) -> Result<bool> {
    let cfg = opts.experiment(Refinement::Uniform)?;
    let records = harness::run_experiment(&cfg)?;
    print_table(&records);
    let d = cfg.problem.dim();
    let Some(s) = harness::slopes(&records, d, false) else { return Ok(!opts.assert_slopes) };
    println!(
        "slopes (last two): L2 {:.3}, Hcurl {:.3}; (fit): L2 {:.3}, Hcurl {:.3}",
        s.l2_last, s.hcurl_last, s.l2_fit, s.hcurl_fit
    );
    if !opts.assert_slopes {
        return Ok(true);
    }
    let k = cfg.order as f64;
    let tol = match cfg.problem {
        Problem::Unit2d => 0.15,
        Problem::LShaped(1) => 0.1,
        _ => 0.2,
    };
    let mut ok = check("Hcurl", s.hcurl_last, cfg.problem.expected_rate(cfg.order), tol);
    if matches!(cfg.problem, Problem::Unit2d | Problem::Unit3d) {
        ok &= check("L2", s.l2_last, k, tol);
    }
    Ok(ok)
}

fn adapt(opts: &Opts) -> Result<bool> {
    let cfg = opts.experiment(Refinement::Adaptive(opts.mark_fraction.unwrap_or(0.05)))?;
    let records = harness::run_experiment(&cfg)?;
    print_table(&records);
    let d = cfg.problem.dim();
    let Some(s) = harness::slopes(&records, d, true) else { return Ok(!opts.assert_slopes) };
    println!("rates in dofs^(-1/{d}) (fit): L2 {:.3}, Hcurl {:.3}", s.l2_fit, s.hcurl_fit);
    if !opts.assert_slopes {
        return Ok(true);
    }
    let want = cfg.problem.expected_rate(cfg.order);
    let ok = s.hcurl_fit >= want - 0.1;
    println!("check Hcurl rate >= {:.3}: {:.3} {}", want - 0.1, s.hcurl_fit, if ok { "ok" } else { "FAILED" });
    Ok(ok)
}

fn dump_element(opts: &Opts) -> Result<bool> {
    let dim = opts.dim.unwrap_or(opts.problem()?.dim());
    let kind = CellKind::new(opts.family(), dim)?;
    let element = ReferenceElement::get(kind, opts.order.unwrap_or(1))?;
    eprintln!("{} k={}: {} dofs, condition {:.3e}", kind.name(), element.order, element.n_dofs(), element.condition);
    let csv = element.dump_csv(opts.steps.unwrap_or(4));
    match &opts.out {
        Some(p) => std::fs::write(p, csv)?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    Ok(true)
}

fn problem_mesh(opts: &Opts) -> Result<Mesh> {
    let problem = opts.problem()?;
    let (lo, hi, keep) = problem.domain();
    let d = problem.dim();
    let n0 = opts.initial.unwrap_or(problem.default_initial());
    let steps = opts.steps.unwrap_or(0);
    if let Some(seed) = opts.seed {
        let mut forest = Forest::new(&vec![n0; d], lo, hi, &keep)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..steps {
            let leaves = forest.leaves();
            let pick = leaves[rng.random_range(0..leaves.len())];
            forest.refine(&[pick])?;
        }
        let mesh = forest.to_mesh()?.mesh;
        return if opts.family() == Family::Cube { Ok(mesh) } else { Err(Error::InvalidArgument("refined meshes are hex-only".into())) };
    }
    let hex = structured_hex_mesh_filtered(&vec![n0 << steps; d], lo, hi, &keep)?;
    if opts.family() == Family::Cube {
        Ok(hex)
    } else {
        tetrahedralize(&hex)?.oriented()
    }
}

fn dump_mesh(opts: &Opts) -> Result<bool> {
    let mesh = problem_mesh(opts)?;
    eprintln!("{} cells, {} vertices", mesh.n_cells(), mesh.vertices.len());
    match &opts.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let stem = opts.problem()?.name();
            write_ascii(&mesh, &mut std::fs::File::create(dir.join(format!("{stem}.mesh")))?)?;
            write_vtk(&mesh, None, &mut std::fs::File::create(dir.join(format!("{stem}.vtk")))?)?;
        }
        None => write_ascii(&mesh, &mut std::io::stdout().lock())?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Converge(o) => o.merged().and_then(|o| converge(&o)),
        Command::Adapt(o) => o.merged().and_then(|o| adapt(&o)),
        Command::DumpElement(o) => o.merged().and_then(|o| dump_element(&o)),
        Command::DumpMesh(o) => o.merged().and_then(|o| dump_mesh(&o)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
