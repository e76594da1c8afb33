//! Command-line front end for the `volterra` solver library.
//!
//! Two subcommands: `solve` runs one method and can write the solution and
//! iteration trace as CSV; `compare` runs both methods with identical
//! parameters and prints their convergence side by side.
//!
//! Exit codes: 0 converged, 1 usage or problem-definition error, 2 not
//! converged within the iteration cap, 3 diverged (non-finite values).

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand};
use volterra::problem::{
    builtin_problem, parse_constant, sample, GridFunction, Mesh, VolterraProblem,
};
use volterra::solver::{error_vs_exact, solve, Method, SolveResult, SolverConfig};

#[derive(Parser)]
#[command(
    name = "volterra",
    version,
    about = "Solve nonlinear Volterra integral equations of the second kind"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem with one method and optionally write CSV output
    Solve(SolveArgs),
    /// Run both methods with the same parameters and tabulate their errors
    Compare(CompareArgs),
}

#[derive(Args)]
struct ProblemSource {
    /// Builtin problem name: example1 | example2
    #[arg(long, value_name = "NAME")]
    problem: Option<String>,

    /// Path to a key=value problem file (keys f, K, F, F_prime, x_f, exact)
    #[arg(long, value_name = "PATH")]
    problem_file: Option<PathBuf>,

    /// Forcing term f(x) (inline problem definition)
    #[arg(long, value_name = "EXPR")]
    f: Option<String>,

    /// Kernel K(x,t) (inline problem definition)
    #[arg(long, value_name = "EXPR")]
    kernel: Option<String>,

    /// Nonlinearity F(y) (inline problem definition)
    #[arg(long, value_name = "EXPR")]
    nonlin: Option<String>,

    /// Derivative F'(y) of the nonlinearity (inline problem definition)
    #[arg(long, value_name = "EXPR")]
    nonlin_deriv: Option<String>,

    /// Right endpoint of the interval; a constant expression such as 1.5 or pi
    #[arg(long, value_name = "NUM")]
    xf: Option<String>,

    /// Known exact solution y(x), used for error reporting (inline only)
    #[arg(long, value_name = "EXPR")]
    exact: Option<String>,
}

#[derive(Args)]
struct CommonArgs {
    #[command(flatten)]
    source: ProblemSource,

    /// Number of mesh subintervals
    #[arg(long, default_value_t = 30)]
    n: usize,

    /// Stopping tolerance on the max-norm change between iterates
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,

    /// Iteration cap
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Iteration scheme: sam | vim
    #[arg(long, value_parser = parse_method)]
    method: Method,

    /// Write the solution CSV (x,u[,exact,abs_err]) here
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Write the per-iteration error CSV (iteration,error) here
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Write the combined CSV (iteration,sam_error,vim_error) here
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            process::exit(code);
        }
    };
    let code = match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Compare(args) => run_compare(args),
    };
    process::exit(code);
}

fn fail(message: impl std::fmt::Display) -> i32 {
    eprintln!("error: {message}");
    1
}

fn build_problem(src: &ProblemSource) -> Result<VolterraProblem, String> {
    let inline = [
        src.f.is_some(),
        src.kernel.is_some(),
        src.nonlin.is_some(),
        src.nonlin_deriv.is_some(),
        src.xf.is_some(),
    ];
    let any_inline = inline.iter().any(|&b| b);
    let sources =
        u8::from(src.problem.is_some()) + u8::from(src.problem_file.is_some()) + u8::from(any_inline);
    if sources == 0 {
        return Err("no problem given; use --problem NAME, --problem-file PATH, or the inline \
                    flags --f --kernel --nonlin --nonlin-deriv --xf"
            .into());
    }
    if sources > 1 {
        return Err(
            "choose exactly one problem source: --problem, --problem-file, or inline flags".into(),
        );
    }
    if src.exact.is_some() && !any_inline {
        return Err("--exact only applies to inline problem definitions".into());
    }
    if let Some(name) = &src.problem {
        return builtin_problem(name).map_err(|e| e.to_string());
    }
    if let Some(path) = &src.problem_file {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read `{}`: {e}", path.display()))?;
        return text
            .parse::<VolterraProblem>()
            .map_err(|e| format!("`{}`: {e}", path.display()));
    }
    if !inline.iter().all(|&b| b) {
        return Err(
            "an inline problem needs all of --f, --kernel, --nonlin, --nonlin-deriv, and --xf"
                .into(),
        );
    }
    let x_end =
        parse_constant(src.xf.as_deref().unwrap()).map_err(|e| format!("--xf: {e}"))?;
    VolterraProblem::from_parts(
        src.f.as_deref().unwrap(),
        src.kernel.as_deref().unwrap(),
        src.nonlin.as_deref().unwrap(),
        src.nonlin_deriv.as_deref().unwrap(),
        x_end,
        src.exact.as_deref(),
    )
    .map_err(|e| e.to_string())
}

fn exit_code_for(result: &SolveResult) -> i32 {
    if result.diverged {
        3
    } else if result.converged {
        0
    } else {
        2
    }
}

fn status_line(result: &SolveResult, cap: usize) -> String {
    if result.diverged {
        format!(
            "diverged (non-finite values) after {} iterations",
            result.iterations
        )
    } else if result.converged {
        format!("converged in {} iterations", result.iterations)
    } else {
        format!("did not converge within {cap} iterations")
    }
}

fn solution_csv(mesh: &Mesh, solution: &GridFunction, exact: Option<&GridFunction>) -> String {
    let mut out = String::new();
    match exact {
        Some(exact) => {
            out.push_str("x,u,exact,abs_err\n");
            for (i, &x) in mesh.points().iter().enumerate() {
                let u = solution.values()[i];
                let e = exact.values()[i];
                let _ = writeln!(out, "{x},{u},{e},{}", (u - e).abs());
            }
        }
        None => {
            out.push_str("x,u\n");
            for (i, &x) in mesh.points().iter().enumerate() {
                let _ = writeln!(out, "{x},{}", solution.values()[i]);
            }
        }
    }
    out
}

fn trace_csv(trace: &[f64]) -> String {
    let mut out = String::from("iteration,error\n");
    for (k, e) in trace.iter().enumerate() {
        let _ = writeln!(out, "{},{e}", k + 1);
    }
    out
}

fn combined_csv(sam: &[f64], vim: &[f64]) -> String {
    let mut out = String::from("iteration,sam_error,vim_error\n");
    for k in 0..sam.len().max(vim.len()) {
        let left = sam.get(k).map(f64::to_string).unwrap_or_default();
        let right = vim.get(k).map(f64::to_string).unwrap_or_default();
        let _ = writeln!(out, "{},{left},{right}", k + 1);
    }
    out
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("cannot write `{}`: {e}", path.display()))
}

fn run_solve(args: SolveArgs) -> i32 {
    let problem = match build_problem(&args.common.source) {
        Ok(p) => p,
        Err(msg) => return fail(msg),
    };
    let cfg = SolverConfig {
        method: args.method,
        n: args.common.n,
        epsilon: args.common.eps,
        max_iter: args.common.max_iter,
    };
    let result = match solve(&problem, &cfg) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let mesh = Mesh::new(problem.x_end(), cfg.n).expect("config was accepted by the solver");

    if let Some(path) = &args.out {
        let exact = problem
            .exact()
            .map(|e| sample(e, &mesh).expect("exact solution uses only x"));
        if let Err(msg) = write_file(path, &solution_csv(&mesh, &result.solution, exact.as_ref()))
        {
            return fail(msg);
        }
    }
    if let Some(path) = &args.trace {
        if let Err(msg) = write_file(path, &trace_csv(&result.trace)) {
            return fail(msg);
        }
    }

    println!("method: {}", args.method);
    println!("{}", status_line(&result, cfg.max_iter));
    if let Some(err) = error_vs_exact(&result, &problem, &mesh) {
        println!("max abs error vs exact solution: {err:.6}");
    }
    exit_code_for(&result)
}

fn run_compare(args: CompareArgs) -> i32 {
    let problem = match build_problem(&args.common.source) {
        Ok(p) => p,
        Err(msg) => return fail(msg),
    };
    let run = |method: Method| {
        let cfg = SolverConfig {
            method,
            n: args.common.n,
            epsilon: args.common.eps,
            max_iter: args.common.max_iter,
        };
        solve(&problem, &cfg)
    };
    let sam = match run(Method::Sam) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let vim = match run(Method::Vim) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };

    if let Some(path) = &args.out {
        if let Err(msg) = write_file(path, &combined_csv(&sam.trace, &vim.trace)) {
            return fail(msg);
        }
    }

    let cell = |trace: &[f64], k: usize| match trace.get(k) {
        Some(e) => format!("{:>9}  {:>10.6}", k + 1, e),
        None => String::new(),
    };
    let heading = |text: &str| format!("{text:<34}");
    println!(
        "{}Variational Iteration Method",
        heading("Successive Approximation Method")
    );
    println!("{}iteration       error", heading("iteration       error"));
    for k in 0..sam.trace.len().max(vim.trace.len()) {
        println!("{:<34}{}", cell(&sam.trace, k), cell(&vim.trace, k));
    }
    println!();

    let mesh = Mesh::new(problem.x_end(), args.common.n).expect("config was accepted");
    for (name, result) in [("sam", &sam), ("vim", &vim)] {
        let mut line = format!("{name}: {}", status_line(result, args.common.max_iter));
        if let Some(err) = error_vs_exact(result, &problem, &mesh) {
            let _ = write!(line, "; max abs error vs exact solution: {err:.6}");
        }
        println!("{line}");
    }

    exit_code_for(&sam).max(exit_code_for(&vim))
}
