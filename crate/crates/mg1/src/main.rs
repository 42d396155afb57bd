//! Command-line front end: validate chain specs, solve truncated chains,
//! run truncation-error sweeps, and print heavy-tail class diagnostics.
//!
//! Exit codes: 0 = success with all verdicts pass or not-applicable,
//! 1 = a verdict failed, 2 = input error.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use mg1::model::{Mg1Spec, Severity};
use mg1::tails::{
    check_long_tailed, check_p_order, check_subexponential, ClassDiagnostics, IntegratedTail,
    LightTailControl, SurvivalDist, DEFAULT_GRID, SUBEXP_CUTOFF, SUBEXP_GRID,
};
use mg1::verify::{fmt_float, reference_solution, run_sweep, solve_chain, REF_TOL};

#[derive(Parser)]
#[command(
    name = "mg1",
    about = "Stationary distributions of M/G/1-type Markov chains via LI truncation, \
             with truncation-error verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a chain spec and print its drift report.
    Validate {
        /// Chain spec JSON file.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Solve the LI truncation at increment N; write the head as CSV `k,i,pi`.
    Solve {
        #[arg(long)]
        spec: PathBuf,
        /// Truncation increment.
        #[arg(long = "N")]
        n: usize,
        /// Number of levels to compute (default 4N).
        #[arg(long = "L")]
        l: Option<usize>,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep truncation increments and compare the TV errors against the
    /// theoretical decay constant; writes CSV plus a companion JSON.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Comma-separated increasing truncation increments.
        #[arg(long = "Ns", value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        /// Reference truncation increment (>= 8x the largest sweep value).
        #[arg(long = "Nref")]
        n_ref: usize,
        /// Output CSV path; the companion JSON lands next to it.
        #[arg(long)]
        out: PathBuf,
        /// Tail exponent of the reference distribution; defaults to the
        /// chain's own power-tail exponent.
        #[arg(long)]
        gamma: Option<f64>,
        /// Stability budget for the reference doubling check, relative to
        /// Fbar at the largest sweep increment.
        #[arg(long = "ref-tol", default_value_t = REF_TOL)]
        ref_tol: f64,
    },
    /// Heavy-tail class diagnostics for the integrated power tail with the
    /// given exponent, alongside the light-tailed control.
    TailsCheck {
        #[arg(long)]
        gamma: f64,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("ERROR 2: {}", msg.replace('\n', " "));
            2
        }
    };
    std::process::exit(code);
}

fn run(command: Command) -> Result<i32, String> {
    match command {
        Command::Validate { spec } => cmd_validate(&spec),
        Command::Solve { spec, n, l, out } => cmd_solve(&spec, n, l, out.as_deref()),
        Command::Sweep {
            spec,
            ns,
            n_ref,
            out,
            gamma,
            ref_tol,
        } => cmd_sweep(&spec, &ns, n_ref, &out, gamma, ref_tol),
        Command::TailsCheck { gamma } => cmd_tails_check(gamma),
    }
}

fn load_spec(path: &Path) -> Result<Mg1Spec, String> {
    Mg1Spec::from_path(path).map_err(|e| e.to_string())
}

fn cmd_validate(path: &Path) -> Result<i32, String> {
    let spec = load_spec(path)?;
    let violations = spec.validate();
    for v in &violations {
        println!("{}: {}", v.severity, v.message);
    }
    let has_errors = violations.iter().any(|v| v.severity == Severity::Error);
    if has_errors {
        println!("spec invalid");
        return Ok(1);
    }

    let report = spec.drift_report().map_err(|e| e.to_string())?;
    println!("phases: M0 = {}, M1 = {}", spec.m0, spec.m1);
    print!("varpi =");
    for v in report.varpi.as_slice() {
        print!(" {}", fmt_float(*v));
    }
    println!();
    print!("mbar_A =");
    for v in &report.mbar_a {
        print!(" {}", fmt_float(*v));
    }
    println!();
    println!("sigma = {}", fmt_float(report.sigma));
    println!("A irreducible: {}", report.a_irreducible);
    println!("mean boundary increment finite: {}", report.mbar_b_finite);
    println!("drift negative: {}", report.drift_negative);
    println!(
        "full-chain irreducibility (sufficient check only): {}",
        report.p_irreducible_sufficient
    );
    println!("assumption1_ok = {}", report.assumption1_ok);
    Ok(if report.assumption1_ok { 0 } else { 1 })
}

fn cmd_solve(path: &Path, n: usize, l: Option<usize>, out: Option<&Path>) -> Result<i32, String> {
    let spec = load_spec(path)?;
    let l = l.unwrap_or(4 * n);
    let solved = solve_chain(&spec, n, l).map_err(|e| e.to_string())?;

    let mut csv = String::from("k,i,pi\n");
    for (k, row) in solved.head.levels().iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            csv.push_str(&format!("{k},{i},{}\n", fmt_float(*v)));
        }
    }
    match out {
        Some(p) => std::fs::write(p, csv).map_err(|e| format!("{}: {e}", p.display()))?,
        None => print!("{csv}"),
    }

    eprintln!("G residual = {}", fmt_float(solved.g.residual));
    eprintln!(
        "tail mass beyond level {l} = {}",
        fmt_float(solved.head.tail_mass())
    );
    if solved.head.tail_mass_raw() < -1e-12 {
        eprintln!(
            "warning: computed mass exceeds one by {}",
            fmt_float(-solved.head.tail_mass_raw())
        );
    }
    if let Some(norm) = solved.head.normalization() {
        eprintln!(
            "pi(0) mass = {} (series-only normalization would give {})",
            fmt_float(norm.pi0_mass),
            fmt_float(norm.pi0_mass_series_only)
        );
    }
    Ok(0)
}

fn cmd_sweep(
    path: &Path,
    ns: &[usize],
    n_ref: usize,
    out: &Path,
    gamma_flag: Option<f64>,
    ref_tol: f64,
) -> Result<i32, String> {
    let spec = load_spec(path)?;
    let gamma = gamma_flag
        .or_else(|| spec.aseq.tail().map(|t| t.gamma))
        .or_else(|| spec.bseq.tail().map(|t| t.gamma))
        .ok_or("chain has bounded increments; supply --gamma for the reference distribution")?;
    let f = IntegratedTail::new(gamma).map_err(|e| e.to_string())?;
    let max_n = *ns
        .iter()
        .max()
        .ok_or("at least one sweep increment is required")?;

    let reference = reference_solution(&spec, &f, n_ref, 4 * n_ref, max_n, ref_tol)
        .map_err(|e| e.to_string())?;
    let report = run_sweep(&spec, &f, ns, 4, &reference, &[0, 1, 5]).map_err(|e| e.to_string())?;

    std::fs::write(out, report.to_csv()).map_err(|e| format!("{}: {e}", out.display()))?;
    let json_path = out.with_extension("json");
    std::fs::write(&json_path, report.to_json())
        .map_err(|e| format!("{}: {e}", json_path.display()))?;

    println!(
        "reference: N_ref = {n_ref}, stability gap = {}",
        fmt_float(reference.stability_gap)
    );
    println!(
        "theoretical constant = {}",
        fmt_float(report.theoretical_constant)
    );
    println!("applicable = {}", report.applicable);
    let v = &report.verdicts;
    println!("verdict ratio_F final:        {}", v.ratio_f_final);
    println!("verdict ratio_F monotone:     {}", v.ratio_f_monotone);
    println!("verdict ratio_tail final:     {}", v.ratio_tail_final);
    println!("verdict level-wise final:     {}", v.levelwise_final);
    println!("verdict level-wise positive:  {}", v.levelwise_positive);
    println!("verdict reference tail ratio: {}", v.reference_tail_ratio);
    println!("wrote {} and {}", out.display(), json_path.display());
    Ok(if v.all_acceptable() { 0 } else { 1 })
}

fn print_diagnostics(name: &str, d: &ClassDiagnostics) {
    println!("{name}");
    println!("  {:>12}  {:>24}", "x", "ratio");
    for (x, r) in d.xs.iter().zip(&d.ratios) {
        println!("  {:>12}  {:>24}", x, fmt_float(*r));
    }
    println!("  limit estimate = {}", fmt_float(d.limit_estimate));
    println!("  verdict = {}", d.verdict);
}

fn cmd_tails_check(gamma: f64) -> Result<i32, String> {
    let f = IntegratedTail::new(gamma).map_err(|e| e.to_string())?;
    let err = |e: mg1::tails::TailError| e.to_string();

    println!("integrated power tail, source exponent {gamma}:");
    println!(
        "  survival at 0 / 10 / 1000: {} / {} / {}",
        fmt_float(f.survival(0.0).map_err(err)?),
        fmt_float(f.survival(10.0).map_err(err)?),
        fmt_float(f.survival(1000.0).map_err(err)?),
    );
    let lt = check_long_tailed(&f, 1.0, &DEFAULT_GRID).map_err(err)?;
    print_diagnostics("long-tailed check (shift 1):", &lt);
    let p2 = check_p_order(&f, 2.0, 1.0, &DEFAULT_GRID).map_err(err)?;
    print_diagnostics("2nd-order long-tailed check (xi = 1):", &p2);
    let se = check_subexponential(&f, SUBEXP_CUTOFF, &SUBEXP_GRID).map_err(err)?;
    print_diagnostics("subexponential check (self-convolution):", &se);

    println!();
    println!("light-tailed control (survival exp(-x)):");
    let control = LightTailControl;
    let control_grid = [10.0, 50.0, 100.0, 300.0];
    let c_lt = check_long_tailed(&control, 1.0, &control_grid).map_err(err)?;
    print_diagnostics("long-tailed check (shift 1):", &c_lt);
    let c_p2 = check_p_order(&control, 2.0, 1.0, &control_grid).map_err(err)?;
    print_diagnostics("2nd-order long-tailed check (xi = 1):", &c_p2);
    let c_se = check_subexponential(&control, 2_000, &[50.0, 200.0, 600.0]).map_err(err)?;
    print_diagnostics("subexponential check (self-convolution):", &c_se);

    let family_ok = lt.verdict && p2.verdict && se.verdict;
    let control_ok = !c_lt.verdict && !c_p2.verdict && !c_se.verdict;
    println!();
    println!("power family verdicts all true: {family_ok}");
    println!("control verdicts all false: {control_ok}");
    Ok(if family_ok && control_ok { 0 } else { 1 })
}
