mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use flagpde::exec::{self, Exec};
use flagpde::ivp::TreeWaveMethod;

use input::Inputs;
use report::{verification_block, CliResult, Failure, InputDigest, Outcome, RunReport, EXIT_VERIFICATION};

#[derive(Parser)]
#[command(
    name = "flagpde",
    version,
    about = "Exact polynomial solutions of flag equations, tree wave problems and polynomial Lie modules"
)]
struct Cli {
    /// Write the result here (`.csv` for tabular results, JSON otherwise).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true, env = "FLAGPDE_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Polynomial solution bases.
    #[command(subcommand)]
    Basis(BasisCmd),
    /// Closed-form solutions.
    #[command(subcommand)]
    Solve(SolveCmd),
    /// Tree operators and their splitting.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Initial value problems with trigonometric data.
    #[command(subcommand)]
    Ivp(IvpCmd),
    /// Lie algebra modules of polynomial solutions.
    #[command(subcommand)]
    Lie(LieCmd),
    /// Constant-coefficient linear ODE `y^(m) = b1 y^(m-1) + ... + bm y`.
    Ode {
        /// Comma-separated `b1..bm`.
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// Comma-separated initial values `y(0), y'(0), ...`.
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
}

#[derive(Subcommand)]
enum BasisCmd {
    /// `∂1^m1 + ... + ∂n^mn`.
    Constant {
        /// Comma-separated orders.
        #[arg(long)]
        orders: String,
        #[arg(long)]
        cap: u32,
    },
    /// Laplace equation in `n` variables.
    Harmonic {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cap: u32,
    },
    /// Flag equation from a JSON file `{vars?, orders, coefficients}`.
    Flag {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        cap: u32,
    },
    /// `u_tt + u_t - Δu`.
    Dissipative {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cap: u32,
    },
    /// `t u_tt + λ u_t - ε t Δu`.
    Anisym {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
        epsilon: i64,
        #[arg(long)]
        cap: u32,
    },
}

#[derive(Subcommand)]
enum SolveCmd {
    /// Real solutions of `u_tt - u_xx - x u_yy - y u_zz + a² u = 0`.
    KleinGordon {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        /// Exponents of the seed monomial `x^i y^j z^k`, as `i,j,k`.
        #[arg(long)]
        monomial: String,
        #[arg(long)]
        max_iterations: Option<usize>,
    },
}

#[derive(Subcommand)]
enum TreeCmd {
    /// Checks a tree file `{nodes, edges}`.
    Validate {
        #[arg(long)]
        tree: PathBuf,
    },
    /// Splitting exponents of the tree operator.
    Xi {
        #[arg(long)]
        tree: PathBuf,
    },
    /// Compares both expansions of `e^{t d}` on every monomial up to a degree.
    CheckSplitting {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[arg(long, default_value_t = 3)]
        t_power: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Splitting,
    Taylor,
}

#[derive(Subcommand)]
enum IvpCmd {
    /// Flag equation in `x1` with data on `x1 = 0`.
    Flag {
        /// JSON `{coefficients: [...]}` in the symbols `D2..Dn`.
        #[arg(long)]
        equation: PathBuf,
        /// JSON `{halfWidths, modes | conditions}`.
        #[arg(long)]
        data: PathBuf,
        /// Points per axis, `x1` first, e.g. `5x5`.
        #[arg(long)]
        grid: String,
        /// Upper end of the `x1` range.
        #[arg(long, default_value_t = 1.0)]
        x1: f64,
        /// Skip the finite-difference residual.
        #[arg(long)]
        no_residual: bool,
    },
    /// Wave equation of a tree operator.
    TreeWave {
        #[arg(long)]
        tree: PathBuf,
        /// JSON `{halfWidths, modes | conditions}`: position, then velocity.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        t: f64,
        /// Points per axis, e.g. `3x3x3`.
        #[arg(long)]
        grid: String,
        #[arg(long, value_enum, default_value_t = Method::Splitting)]
        method: Method,
    },
}

#[derive(Subcommand)]
enum LieCmd {
    /// Harmonic polynomials of degree `k` as an so(n) module.
    Harmonic {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u32,
    },
    /// sl(n) module of bidegree `(l1, l2)`.
    Sl {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l1: u32,
        #[arg(long)]
        l2: u32,
    },
    /// G2 module of degree `k`.
    G2 {
        #[arg(long)]
        k: u32,
    },
    /// Structure relations and operator identities.
    Check {
        #[arg(long, default_value_t = 4)]
        degree: u32,
    },
}

fn dispatch(command: &Command, inputs: &mut Inputs, seed: u64) -> CliResult<Outcome> {
    use commands as c;
    match command {
        Command::Basis(b) => match b {
            BasisCmd::Constant { orders, cap } => c::basis_constant(orders, *cap),
            BasisCmd::Harmonic { n, cap } => c::basis_harmonic(*n, *cap),
            BasisCmd::Flag { spec, cap } => c::basis_flag(inputs, spec, *cap),
            BasisCmd::Dissipative { n, cap } => c::basis_dissipative(*n, *cap),
            BasisCmd::Anisym {
                n,
                lambda,
                epsilon,
                cap,
            } => c::basis_anisym(*n, lambda, *epsilon, *cap),
        },
        Command::Solve(SolveCmd::KleinGordon {
            a,
            monomial,
            max_iterations,
        }) => c::klein_gordon(a, monomial, *max_iterations),
        Command::Tree(t) => match t {
            TreeCmd::Validate { tree } => c::tree_validate(inputs, tree),
            TreeCmd::Xi { tree } => c::tree_xi(inputs, tree),
            TreeCmd::CheckSplitting {
                tree,
                degree,
                t_power,
            } => c::tree_check_splitting(inputs, tree, *degree, *t_power),
        },
        Command::Ivp(i) => match i {
            IvpCmd::Flag {
                equation,
                data,
                grid,
                x1,
                no_residual,
            } => c::ivp_flag(inputs, equation, data, grid, *x1, !no_residual),
            IvpCmd::TreeWave {
                tree,
                data,
                t,
                grid,
                method,
            } => {
                let method = match method {
                    Method::Splitting => TreeWaveMethod::Splitting,
                    Method::Taylor => TreeWaveMethod::Taylor,
                };
                c::ivp_tree_wave(inputs, tree, data, *t, grid, method)
            }
        },
        Command::Lie(l) => match l {
            LieCmd::Harmonic { n, k } => c::lie_harmonic(*n, *k),
            LieCmd::Sl { n, l1, l2 } => c::lie_sl(*n, *l1, *l2),
            LieCmd::G2 { k } => c::lie_g2(*k),
            LieCmd::Check { degree } => c::lie_check(*degree, seed),
        },
        Command::Ode { b, c: init, t_end, steps } => c::ode(b, init, *t_end, *steps),
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Writes the result and prints the run report; returns the exit code.
fn emit(cli: &Cli, args: Vec<String>, digest: String, outcome: Outcome) -> CliResult<i32> {
    let mut result = Some(outcome.result.clone());
    let mut outputs = None;
    if let Some(path) = &cli.out {
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let body = if is_csv {
            outcome
                .csv
                .clone()
                .ok_or_else(|| Failure::input("this command has no tabular output; use a .json path"))?
        } else {
            pretty(&outcome.result)
        };
        std::fs::write(path, body)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
        outputs = Some(path.display().to_string());
        result = None;
    }
    let report = RunReport {
        command: args,
        inputs_digest: digest,
        outputs,
        verification: verification_block(&outcome),
        result,
    };
    print!("{}", pretty(&report));
    Ok(if outcome.passed() { 0 } else { EXIT_VERIFICATION })
}

fn run(cli: &Cli, args: Vec<String>) -> CliResult<i32> {
    let mut inputs = Inputs {
        digest: InputDigest::new(&args),
    };
    let outcome = match cli.jobs {
        Some(0) => return Err(Failure::input("--jobs must be at least 1")),
        Some(1) => exec::with_mode(Exec::Sequential, || dispatch(&cli.command, &mut inputs, cli.seed)),
        Some(n) => {
            exec::set_threads(n);
            dispatch(&cli.command, &mut inputs, cli.seed)
        }
        None => dispatch(&cli.command, &mut inputs, cli.seed),
    }?;
    emit(cli, args, inputs.digest.finish(), outcome)
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = match run(&cli, args) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    };
    eprintln!("wall time: {:.3}s", start.elapsed().as_secs_f64());
    ExitCode::from(code as u8)
}
