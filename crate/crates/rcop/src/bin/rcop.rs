//! Batch front-end: solve, reduce, certify, and search instances stored in
//! the JSON instance format, plus the bundled demo fixtures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use rcop::certify::{certify, report_to_json, CertifyOptions};
use rcop::demos;
use rcop::model::{read_instance, RcopInstance};
use rcop::solver::{nonconvex_oracle, solve_dwr, DwrSolution, SolveOptions, SolveStatus};

#[derive(Parser)]
#[command(
    name = "rcop",
    about = "Relaxations of rank-constrained problems: solve, reduce, certify",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// Solver tolerance.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Iteration cap for the splitting solver.
    #[arg(long, default_value_t = 200_000)]
    max_iter: usize,
    /// Seed for randomized searches.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multistart count for the rank-constrained search.
    #[arg(long, default_value_t = 32)]
    starts: usize,
    /// Write the JSON report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report to stdout instead of the summary.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the relaxation of an instance file.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Solve, then reduce the optimum to an extreme point of its face.
    Reduce {
        file: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Full exactness certification of an instance file.
    Certify {
        file: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Multistart upper-bound search over the rank-constrained domain.
    Oracle {
        file: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Run a bundled demo fixture and check its annotations.
    Demo {
        /// Demo name; see --list.
        name: Option<String>,
        /// List the available demos.
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        flags: CommonFlags,
    },
}

impl CommonFlags {
    fn solve_options(&self) -> SolveOptions {
        SolveOptions { tol: self.tol, max_iter: self.max_iter, ..Default::default() }
    }

    fn certify_options(&self) -> CertifyOptions {
        CertifyOptions {
            solve: self.solve_options(),
            seed: self.seed,
            oracle_starts: self.starts,
            ..Default::default()
        }
    }
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::MaxIter => "max_iter",
        SolveStatus::InfeasibleLinear => "infeasible_linear",
        SolveStatus::Unbounded => "unbounded",
    }
}

#[derive(Serialize)]
struct SolveJson {
    name: String,
    status: &'static str,
    v_rel: f64,
    iterations: usize,
    primal_residual: f64,
    dual_residual: f64,
    complementarity: f64,
    x_star: Vec<f64>,
    mu_upper: Vec<f64>,
    mu_lower: Vec<f64>,
}

fn solve_json(inst: &RcopInstance, sol: &DwrSolution) -> String {
    let json = SolveJson {
        name: inst.name.clone(),
        status: status_name(sol.status),
        v_rel: sol.v_rel,
        iterations: sol.iterations,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        complementarity: sol.complementarity,
        x_star: sol.x_star.data().to_vec(),
        mu_upper: sol.mu_upper.clone(),
        mu_lower: sol.mu_lower.clone(),
    };
    serde_json::to_string_pretty(&json).expect("serialization cannot fail")
}

fn emit(flags: &CommonFlags, summary: &str, json: &str) -> std::io::Result<()> {
    if let Some(path) = &flags.out {
        std::fs::write(path, json)?;
    }
    if flags.json {
        println!("{json}");
    } else {
        println!("{summary}");
    }
    Ok(())
}

fn load(file: &PathBuf) -> Result<RcopInstance, ExitCode> {
    read_instance(file).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(code) => code,
    }
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    match cli.command {
        Command::Solve { file, flags } => {
            let inst = load(&file)?;
            let sol = solve_dwr(&inst, &flags.solve_options());
            let summary = format!(
                "{}: status {} after {} iterations\n  v_rel = {:.9}\n  residuals: primal {:.2e}, dual {:.2e}, complementarity {:.2e}",
                inst.name,
                status_name(sol.status),
                sol.iterations,
                sol.v_rel,
                sol.primal_residual,
                sol.dual_residual,
                sol.complementarity
            );
            emit(&flags, &summary, &solve_json(&inst, &sol)).map_err(io_fail)?;
            Ok(exit_for(sol.status))
        }
        Command::Reduce { file, flags } => {
            let inst = load(&file)?;
            let sol = solve_dwr(&inst, &flags.solve_options());
            if !sol.is_optimal() {
                eprintln!("solver failed with status {}", status_name(sol.status));
                return Ok(ExitCode::from(3));
            }
            match rcop::certify::reduce_optimal_face(&inst, &sol, 1e-6) {
                Ok(res) => {
                    #[derive(Serialize)]
                    struct ReduceJson {
                        name: String,
                        v_rel: f64,
                        rank: usize,
                        steps: usize,
                        bound_ok: bool,
                        pinned: usize,
                        x: Vec<f64>,
                    }
                    let json = serde_json::to_string_pretty(&ReduceJson {
                        name: inst.name.clone(),
                        v_rel: sol.v_rel,
                        rank: res.rank,
                        steps: res.steps,
                        bound_ok: res.bound_ok,
                        pinned: res.pinned.len(),
                        x: res.x.data().to_vec(),
                    })
                    .expect("serialization cannot fail");
                    let summary = format!(
                        "{}: reduced to rank {} in {} steps ({} pinned equalities, rank bound {})",
                        inst.name,
                        res.rank,
                        res.steps,
                        res.pinned.len(),
                        if res.bound_ok { "holds" } else { "violated" }
                    );
                    emit(&flags, &summary, &json).map_err(io_fail)?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("reduction failed: {e}");
                    Ok(ExitCode::from(3))
                }
            }
        }
        Command::Certify { file, flags } => {
            let inst = load(&file)?;
            let certified = certify(&inst, &flags.certify_options());
            let json = report_to_json(&inst.name, &certified);
            let r = &certified.report;
            let mut summary = format!(
                "{}: status {}, v_rel = {:.9}\n  m = {}, m_tilde = {}, m_bind = {}, m_star = {:?}\n  verified: extreme point {:?}, objective {:?}, convex hull {:?}\n  gap = {:?}",
                inst.name,
                status_name(certified.solution.status),
                certified.solution.v_rel,
                r.m,
                r.m_tilde,
                r.m_bind,
                r.m_star,
                r.verified.extreme_point,
                r.verified.objective,
                r.verified.convex_hull,
                r.gap
            );
            for p in &r.predictions {
                summary.push_str(&format!(
                    "\n  [{}] {}: {}",
                    if p.applies { "applies" } else { "  no   " },
                    p.rule,
                    p.reason
                ));
            }
            emit(&flags, &summary, &json).map_err(io_fail)?;
            Ok(exit_for(certified.solution.status))
        }
        Command::Oracle { file, flags } => {
            let inst = load(&file)?;
            match nonconvex_oracle(&inst, flags.starts, flags.seed) {
                Some(found) => {
                    #[derive(Serialize)]
                    struct OracleJson {
                        name: String,
                        v_ub: f64,
                        x: Vec<f64>,
                    }
                    let json = serde_json::to_string_pretty(&OracleJson {
                        name: inst.name.clone(),
                        v_ub: found.value,
                        x: found.x.data().to_vec(),
                    })
                    .expect("serialization cannot fail");
                    let summary =
                        format!("{}: feasible upper bound v_ub = {:.9}", inst.name, found.value);
                    emit(&flags, &summary, &json).map_err(io_fail)?;
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("{}: no feasible rank-constrained point found", inst.name);
                    Ok(ExitCode::from(3))
                }
            }
        }
        Command::Demo { name, list, flags } => {
            if list || name.is_none() {
                for (name, description) in demos::list() {
                    println!("{name:10} {description}");
                }
                return Ok(ExitCode::SUCCESS);
            }
            let name = name.unwrap();
            match demos::run(&name, &flags.certify_options()) {
                Some(outcome) => {
                    if flags.json {
                        if let Some(json) = &outcome.report_json {
                            println!("{json}");
                        }
                    } else {
                        println!("{}: {}", outcome.name, outcome.description);
                        for c in &outcome.checks {
                            println!(
                                "  [{}] {}{}",
                                if c.pass { "pass" } else { "FAIL" },
                                c.what,
                                if c.detail.is_empty() {
                                    String::new()
                                } else {
                                    format!(" ({})", c.detail)
                                }
                            );
                        }
                    }
                    if let (Some(path), Some(json)) = (&flags.out, &outcome.report_json) {
                        std::fs::write(path, json).map_err(io_fail)?;
                    }
                    if outcome.ok() {
                        Ok(ExitCode::SUCCESS)
                    } else {
                        Ok(ExitCode::from(1))
                    }
                }
                None => {
                    eprintln!("unknown demo {name:?}; try `rcop demo --list`");
                    Ok(ExitCode::from(2))
                }
            }
        }
    }
}

fn exit_for(status: SolveStatus) -> ExitCode {
    match status {
        SolveStatus::Optimal => ExitCode::SUCCESS,
        _ => ExitCode::from(3),
    }
}

fn io_fail(e: std::io::Error) -> ExitCode {
    eprintln!("io error: {e}");
    ExitCode::from(2)
}
