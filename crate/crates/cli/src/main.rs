//! `descent`: runs the dimensional-descent scenarios from TOML configs.
//!
//! Exit status: 0 when every tolerance passes, 1 on a tolerance failure or a
//! runtime error, 2 on a configuration error (nothing is written then).

mod audit;
mod config;
mod plot;
mod report;
mod scenarios;

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use clap::{Parser, Subcommand};
use descent_core::clifford::GammaRepresentation;
use serde_json::json;

use config::{ScenarioConfig, ScenarioKind};
use report::{all_pass, print_checks, Check};

const EXIT_TOLERANCE: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "descent", version, about = "Dimensional-descent scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one or more scenario configs.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Output root; each run writes to `<root>/<output.dir or config stem>`.
        #[arg(long, env = "DESCENT_OUT", default_value = "descent-out")]
        out: PathBuf,
        /// Run up to N configs concurrently in child processes.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: u32,
        /// Skip the SVG plots.
        #[arg(long)]
        no_plots: bool,
    },
    /// List scenario kinds with their defaults.
    List,
    /// Audit a gamma-matrix representation stored as JSON.
    Audit {
        rep: PathBuf,
        /// Also write `audit.json` into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Cmd::List => {
            list();
            0
        }
        Cmd::Audit { rep, out } => audit_file(&rep, out.as_deref()),
        Cmd::Run {
            configs,
            out,
            jobs,
            no_plots,
        } => run_all(&configs, &out, jobs as usize, no_plots),
    };
    ExitCode::from(code)
}

fn list() {
    println!("{:<18} {:<10} {:<14} {:<8} {:<6} description", "scenario", "grid", "dt / T", "mass", "charge");
    for kind in ScenarioKind::ALL {
        let d = kind.defaults();
        let grid = match kind {
            ScenarioKind::AlgebraAudit => format!("{} reps", d.audit_samples + 2),
            _ => d.grid.points.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("x"),
        };
        println!(
            "{:<18} {:<10} {:<14} {:<8} {:<6} {}",
            kind.name(),
            grid,
            format!("{} / {}", d.time.dt, d.time.t_final),
            d.physics.mass,
            d.physics.charge,
            kind.description()
        );
    }
}

fn output_dir(root: &Path, config_path: &Path, cfg: &ScenarioConfig) -> PathBuf {
    let name = cfg.output.dir.clone().unwrap_or_else(|| {
        PathBuf::from(config_path.file_stem().map(|s| s.to_os_string()).unwrap_or_else(|| cfg.kind.name().into()))
    });
    root.join(name)
}

fn run_all(paths: &[PathBuf], root: &Path, jobs: usize, no_plots: bool) -> u8 {
    // every config is validated before anything is written
    let mut configs = Vec::with_capacity(paths.len());
    for p in paths {
        match ScenarioConfig::load(p) {
            Ok(cfg) => configs.push(cfg),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    if jobs > 1 && paths.len() > 1 {
        return run_children(paths, root, jobs, no_plots);
    }
    let mut code = 0;
    for (p, cfg) in paths.iter().zip(&configs) {
        code = code.max(run_one(p, cfg, root, no_plots));
    }
    code
}

fn run_children(paths: &[PathBuf], root: &Path, jobs: usize, no_plots: bool) -> u8 {
    let exe = match std::env::current_exe() {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: cannot locate own executable: {e}");
            return EXIT_TOLERANCE;
        }
    };
    let mut code = 0u8;
    for batch in paths.chunks(jobs) {
        let children: Vec<_> = batch
            .iter()
            .map(|p| {
                let mut cmd = Command::new(&exe);
                cmd.arg("run").arg(p).arg("--out").arg(root);
                if no_plots {
                    cmd.arg("--no-plots");
                }
                (p, cmd.spawn())
            })
            .collect();
        for (p, child) in children {
            let status = child.and_then(|mut c| c.wait());
            let child_code = match status {
                Ok(s) => s.code().map_or(EXIT_TOLERANCE, |c| c.clamp(0, 255) as u8),
                Err(e) => {
                    eprintln!("error: {}: {e}", p.display());
                    EXIT_TOLERANCE
                }
            };
            code = code.max(child_code);
        }
    }
    code
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

fn run_one(path: &Path, cfg: &ScenarioConfig, root: &Path, no_plots: bool) -> u8 {
    let dir = output_dir(root, path, cfg);
    println!("{} ({}): seed {}", path.display(), cfg.kind, cfg.seed);
    let start = Instant::now();
    let outcome = match scenarios::run(cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {} failed: {e}", path.display());
            return EXIT_TOLERANCE;
        }
    };
    let passed = all_pass(&outcome.checks);
    let failed: Vec<&str> = outcome.checks.iter().filter(|c| !c.pass).map(|c| c.invariant.as_str()).collect();
    let report = json!({
        "scenario": cfg.kind.name(),
        "seed": cfg.seed,
        "passed": passed,
        "failed": failed,
        "checks": outcome.checks,
        "metrics": outcome.metrics,
        "config": cfg,
    });
    let written = (|| -> Result<(), Box<dyn std::error::Error>> {
        std::fs::create_dir_all(&dir)?;
        outcome.series.save_csv(dir.join("diagnostics.csv"))?;
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
        if cfg.plots_enabled() && !no_plots {
            let plots = dir.join("plots");
            std::fs::create_dir_all(&plots)?;
            for name in outcome.series.channel_names() {
                let points = outcome.series.channel(name).unwrap_or(&[]);
                std::fs::write(plots.join(format!("{}.svg", sanitize(name))), plot::line_plot(name, points))?;
            }
        }
        Ok(())
    })();
    if let Err(e) = written {
        eprintln!("error: writing {}: {e}", dir.display());
        return EXIT_TOLERANCE;
    }
    print_checks(&outcome.checks);
    println!(
        "  {} in {:.2} s -> {}",
        if passed { "passed" } else { "FAILED" },
        start.elapsed().as_secs_f64(),
        dir.display()
    );
    if passed {
        0
    } else {
        EXIT_TOLERANCE
    }
}

fn audit_file(path: &Path, out: Option<&Path>) -> u8 {
    let rep = match GammaRepresentation::load(path) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    };
    let checks: Vec<Check> = audit::audit_representation(&rep);
    println!("{} ({}, n = {}, N = {})", path.display(), rep.label(), rep.spatial_dim(), rep.order());
    print_checks(&checks);
    let passed = all_pass(&checks);
    if let Some(dir) = out {
        let report = json!({ "label": rep.label(), "passed": passed, "checks": checks });
        let res = std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(dir.join("audit.json"), serde_json::to_string_pretty(&report).unwrap_or_default() + "\n"));
        if let Err(e) = res {
            eprintln!("error: writing {}: {e}", dir.display());
            return EXIT_TOLERANCE;
        }
    }
    if passed {
        0
    } else {
        EXIT_TOLERANCE
    }
}
