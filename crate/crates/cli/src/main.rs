use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lattix::drivers::{self, DemoName};
use lattix::geometry::LevelSet;
use lattix::io::{export_fields, write_csv, LatticeFile, ProblemConfig};
use lattix::rom::{load_model, ClusterGrid, TrainOptions};
use lattix::solve::{run_solve, SolverMode, SolverOptions};
use lattix::Error;

/// 2D lattice elasticity on implicitly trimmed cells: unfitted high-order
/// elements, fast tensor assembly, trained surrogates, and a
/// BDDC-preconditioned CG solver.
#[derive(Parser)]
#[command(name = "lattix", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem described by a configuration file.
    Solve {
        config: PathBuf,
        /// output directory for reports and field exports
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// samples per cell per direction in field exports
        #[arg(long, default_value_t = 30)]
        resolution: usize,
        /// skip writing field files
        #[arg(long)]
        no_export: bool,
    },
    /// Convergence study on the manufactured single-cell problem.
    Manufactured {
        /// polynomial degrees to run
        #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 4, 6, 8, 10])]
        degrees: Vec<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Quarter-annulus benchmark suite: iterations and timings per size,
    /// with optional interpolation-degree and stabilization sweeps.
    Annulus {
        /// radial cell counts n (grids are 2n x n)
        #[arg(long, value_delimiter = ',', default_values_t = vec![4usize, 8])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 8)]
        p: usize,
        #[arg(long, default_value_t = 2)]
        q: usize,
        #[arg(long, default_value_t = 5e-4)]
        rho: f64,
        #[arg(long, default_value = "bddc-full")]
        mode: String,
        /// surrogate artifact for mode bddc-rom
        #[arg(long)]
        rom: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// fast-assembly accuracy sweep over these interpolation degrees
        /// (runs on the single-subdomain annulus)
        #[arg(long, value_delimiter = ',')]
        sweep_q: Option<Vec<usize>>,
        /// stabilization-error sweep over these values (first size)
        #[arg(long, value_delimiter = ',')]
        sweep_rho: Option<Vec<f64>>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare solver modes (bddc-full, cholesky, cg-sor) on the benchmark.
    Compare {
        #[arg(long, value_delimiter = ',', default_values_t = vec![4usize])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 8)]
        p: usize,
        #[arg(long, default_value_t = 2)]
        q: usize,
        #[arg(long, default_value_t = 0.0)]
        rho: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 200000)]
        max_it: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Train a tensor surrogate over the threshold hypercube and write the
    /// artifact with its manifest.
    TrainRom {
        /// level-set kind (schwarz-diamond, schwarz-primitive, schoen-frd,
        /// schoen-iwp)
        #[arg(long)]
        level_set: String,
        #[arg(long, default_value_t = 8)]
        p: usize,
        #[arg(long, default_value_t = 2)]
        q: usize,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 2)]
        n_k: usize,
        #[arg(long, default_value_t = 40)]
        n_r: usize,
        #[arg(long, default_value_t = 200)]
        n_s: usize,
        #[arg(long, default_value_t = 6)]
        d_int: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// held-out samples per cluster for the validation report
        #[arg(long, default_value_t = 50)]
        n_validation: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a bundled application demo (wing or wrench).
    Demo {
        /// wing | wrench
        name: String,
        #[arg(long, default_value_t = 0.5)]
        scale: f64,
        #[arg(long, default_value_t = 8)]
        p: usize,
        #[arg(long, default_value = "bddc-full")]
        mode: String,
        #[arg(long)]
        rom: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 30)]
        resolution: usize,
        /// write the demo lattice description file and exit
        #[arg(long)]
        emit_lattice: Option<PathBuf>,
    },
    /// Solve a configured problem and export the sampled field (CSV,
    /// legacy VTK, image).
    Export {
        config: PathBuf,
        #[arg(long, default_value_t = 50)]
        resolution: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn parse_mode(s: &str) -> Result<SolverMode, Error> {
    match s {
        "bddc-rom" => Ok(SolverMode::BddcRom),
        "bddc-full" => Ok(SolverMode::BddcFull),
        "cholesky" => Ok(SolverMode::Cholesky),
        "cg-sor" => Ok(SolverMode::CgSor),
        other => Err(Error::Config(format!("unknown solver mode '{other}'"))),
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::Json(_)
        | Error::OutOfTrainingDomain { .. }
        | Error::ModelMismatch(_)
        | Error::MixedBoundaryCondition { .. } => 2,
        Error::Io(_) | Error::Artifact(_) => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err.downcast_ref::<Error>() {
                Some(e) => exit_code_for(e),
                None => 3,
            };
            ExitCode::from(code)
        }
    }
}

fn load_rom_if(path: Option<&Path>) -> anyhow::Result<Option<lattix::rom::RomModel>> {
    Ok(match path {
        Some(p) => Some(load_model(p, None)?),
        None => None,
    })
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve { config, out, resolution, no_export } => {
            let base = config.parent().unwrap_or(Path::new(".")).to_path_buf();
            let cfg = ProblemConfig::load(&config)?;
            let (spec, mode, opts, rom_path) = cfg.to_problem(&base)?;
            let rom = match (&mode, rom_path) {
                (SolverMode::BddcRom, Some(p)) => {
                    let model = load_model(&p, None)?;
                    model.check_compatible(&spec.lattice.cells[0].level_set, spec.p, spec.q)?;
                    Some(model)
                }
                _ => None,
            };
            let (field, report) = run_solve(&spec, mode, rom.as_ref(), &opts)?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("report.json"), serde_json::to_string_pretty(&report)?)?;
            println!(
                "mode {} | {} cells | {} dofs | iterations {:?} | total {:.3}s",
                report.mode, report.n_cells, report.n_dofs, report.iterations, report.timings.total
            );
            if !no_export {
                let paths = export_fields(&field, &spec.lattice, resolution, &out, "field")?;
                for p in paths {
                    println!("wrote {}", p.display());
                }
            }
            Ok(())
        }
        Command::Manufactured { degrees, csv } => {
            let rows = drivers::run_manufactured(&degrees)?;
            println!("{:>4} {:>8} {:>14} {:>14}", "p", "dofs", "l2_abs", "l2_rel");
            for r in &rows {
                println!("{:>4} {:>8} {:>14.6e} {:>14.6e}", r.p, r.n_dofs, r.l2_abs, r.l2_rel);
            }
            if let Some(path) = csv {
                write_csv(&rows, &path)?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Annulus { sizes, p, q, rho, mode, rom, tol, sweep_q, sweep_rho, out } => {
            std::fs::create_dir_all(&out)?;
            let mode = parse_mode(&mode)?;
            let rom_model = load_rom_if(rom.as_deref())?;
            let opts = SolverOptions { tol, max_it: 2000, sor_omega: 1.0 };
            let rows = drivers::run_annulus_suite(&sizes, p, q, rho, mode, rom_model.as_ref(), &opts)?;
            println!(
                "{:>6} {:>8} {:>9} {:>6} {:>9} {:>9} {:>9} {:>9}",
                "cells", "dofs", "skeleton", "iters", "assembly", "setup", "solve", "total"
            );
            for r in &rows {
                println!(
                    "{:>6} {:>8} {:>9} {:>6} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
                    r.n_cells, r.n_dofs, r.n_interface, r.iterations, r.assembly_s, r.setup_s,
                    r.solve_s, r.total_s
                );
            }
            write_csv(&rows, &out.join("annulus.csv"))?;
            if let Some(qs) = sweep_q {
                let rows = drivers::sweep_fast_q(1, 1, p, &qs, 0.0)?;
                for r in &rows {
                    println!("fast-assembly q = {}: relative l2 difference {:.3e}", r.q, r.l2_rel_diff);
                }
                write_csv(&rows, &out.join("annulus_q_sweep.csv"))?;
            }
            if let Some(rhos) = sweep_rho {
                let n = sizes.first().copied().unwrap_or(4);
                let rows = drivers::sweep_rho(n, p, q, &rhos)?;
                for r in &rows {
                    println!("stabilization rho = {:.1e}: relative l2 difference {:.3e}", r.rho, r.l2_rel_diff);
                }
                write_csv(&rows, &out.join("annulus_rho_sweep.csv"))?;
            }
            Ok(())
        }
        Command::Compare { sizes, p, q, rho, tol, max_it, out } => {
            std::fs::create_dir_all(&out)?;
            let opts = SolverOptions { tol, max_it, sor_omega: 1.0 };
            let modes = [SolverMode::BddcFull, SolverMode::Cholesky, SolverMode::CgSor];
            for &n in &sizes {
                let spec = drivers::annulus_problem(n, p, q, rho);
                let rows = drivers::compare_solvers(&spec, &modes, &opts)?;
                println!("grid {}x{}:", 2 * n, n);
                for r in &rows {
                    println!(
                        "  {:>9}: iters {:>8} setup {:>8.3}s solve {:>8.3}s total {:>8.3}s | l2 vs first {:.3e}",
                        r.mode,
                        r.iterations.map_or("-".to_string(), |i| i.to_string()),
                        r.setup_s,
                        r.solve_s,
                        r.total_s,
                        r.l2_vs_first
                    );
                }
                write_csv(&rows, &out.join(format!("compare_{}x{}.csv", 2 * n, n)))?;
            }
            Ok(())
        }
        Command::TrainRom { level_set, p, q, lo, hi, n_k, n_r, n_s, d_int, seed, n_validation, out } => {
            let ls = LevelSet::from_kind_name(&level_set)
                .ok_or_else(|| Error::Config(format!("unknown level-set kind '{level_set}'")))?;
            let grid = ClusterGrid::new(lo, hi, n_k);
            let opts = TrainOptions { n_s, n_r, d_int, seed, ..TrainOptions::default() };
            println!(
                "training {} clusters over [{lo}, {hi}]^4 (p = {p}, q = {q}, n_r = {n_r}, n_s = {n_s}, d_int = {d_int})",
                grid.n_clusters()
            );
            let (_, summaries) = drivers::train_rom(&ls, p, q, grid, &opts, n_validation, &out, |s| {
                println!(
                    "  cluster {:>3}: n_r {:>3} | sigma {:.3e} .. {:.3e} | interp cond {:.2e} | held-out err {:.3e}{}",
                    s.cluster,
                    s.n_r,
                    s.leading_singular_value,
                    s.trailing_singular_value,
                    s.interp_condition,
                    s.validation_error,
                    if s.rank_deficient { " (rank-truncated)" } else { "" }
                );
            })?;
            let worst = summaries.iter().map(|s| s.validation_error).fold(0.0, f64::max);
            println!("artifact written to {} (worst held-out error {worst:.3e})", out.display());
            Ok(())
        }
        Command::Demo { name, scale, p, mode, rom, out, resolution, emit_lattice } => {
            let name: DemoName = name.parse()?;
            if let Some(path) = emit_lattice {
                let lattice = match name {
                    DemoName::Wing => drivers::wing_lattice(scale),
                    DemoName::Wrench => drivers::wrench_lattice(2024),
                };
                LatticeFile::from_lattice(&lattice)?.save(&path)?;
                println!("wrote {}", path.display());
                return Ok(());
            }
            let mode = parse_mode(&mode)?;
            let rom_model = load_rom_if(rom.as_deref())?;
            let opts = SolverOptions { tol: 1e-8, max_it: 500, sor_omega: 1.0 };
            let (spec, field, report) = drivers::run_demo(name, scale, p, mode, rom_model.as_ref(), &opts)?;
            println!(
                "{name:?}: {} cells | {} dofs | iterations {:?} | total {:.2}s",
                report.n_cells, report.n_dofs, report.iterations, report.timings.total
            );
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("report.json"), serde_json::to_string_pretty(&report)?)?;
            let stem = format!("{name:?}").to_lowercase();
            let paths = export_fields(&field, &spec.lattice, resolution, &out, &stem)?;
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Export { config, resolution, out } => {
            let base = config.parent().unwrap_or(Path::new(".")).to_path_buf();
            let cfg = ProblemConfig::load(&config)?;
            let (spec, mode, opts, rom_path) = cfg.to_problem(&base)?;
            let rom = match rom_path {
                Some(p) if mode == SolverMode::BddcRom => Some(load_model(&p, None)?),
                _ => None,
            };
            let (field, _) = run_solve(&spec, mode, rom.as_ref(), &opts)?;
            let paths = export_fields(&field, &spec.lattice, resolution, &out, "field")?;
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}
