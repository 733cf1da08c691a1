//! Command-line front end. [`run`] parses an argument vector, dispatches to the
//! library and writes the result to `out`; the `contlog` binary is a thin
//! wrapper around it.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error, 3 failed internal
//! assertion (consistency check or worst-case bound).

use std::fmt::Write as _;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;

use crate::cl::{cf_eval, cl_run, continuants, cost_vector, Convention, ExponentSeq};
use crate::constants::{const_a, const_d, m_table, Cost};
use crate::error::{invalid, Error, Result};
use crate::experiments::{
    conjecture_test, dirichlet_check, mean_costs, slope_estimate, worstcase_scan, write_csv, ConjectureConfig,
    CsvRow, OmegaSpec,
};
use crate::numbers::Rational;
use crate::spectral::{eigen, taylor_estimates, DEFAULT_TAIL_TOL};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_601;
/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "CONTLOG_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "contlog", version, about = "Continued logarithm gcd algorithm: traces, constants, spectra and experiments")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value = "text", global = true)]
    pub format: Format,
    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for every random draw.
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, env = THREADS_ENV, default_value_t = 0, global = true)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execution table of the algorithm on (p, q).
    Trace {
        p: BigUint,
        q: BigUint,
        #[arg(long, value_enum, default_value = "canonical")]
        convention: ConventionArg,
    },
    /// Exponents of the expansion of a rational in (0, 1).
    Expand {
        /// The rational, as p/q.
        #[arg(long)]
        rational: String,
        /// Keep only the first k exponents.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Rational value, continuants and costs of an exponent sequence.
    Eval {
        /// Comma-separated exponents, e.g. 1,2,0.
        #[arg(long)]
        exponents: String,
    },
    /// Closed-form constants and the cost table.
    Constants,
    /// Dominant eigenpair of the transfer operator H_{t,v}.
    Eigen(EigenArgs),
    /// Finite-difference Taylor coefficients of the dominant eigenvalue.
    Taylor {
        #[arg(long, default_value_t = 1e-3)]
        fd_step: f64,
        #[arg(long, default_value_t = 48)]
        grid: usize,
    },
    /// Mean costs over coprime pairs with q <= N; slopes when N >= 2^16 is sampled.
    Experiment {
        #[arg(long)]
        nmax: u64,
        /// Pairs per rung in sampled mode.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        exhaustive: bool,
        /// Include non-coprime pairs.
        #[arg(long)]
        all_pairs: bool,
        /// Also write the CSV rows to this file.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Partial sum of phi(q) q^{-2s} against zeta(2s-1)/zeta(2s).
    Dirichlet {
        #[arg(long, default_value_t = 2.0)]
        s: f64,
        #[arg(long, default_value_t = 10_000)]
        nmax: u64,
    },
    /// K and S on the inputs (1, 2^n - 1).
    Worstcase {
        #[arg(long, default_value_t = 64)]
        nmax: u32,
    },
    /// Two estimates of B + D and the test of D - B = log 2.
    Conjecture {
        #[arg(long, default_value_t = 256)]
        bits: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Largest N of the slope ladder.
        #[arg(long, default_value_t = 1_000_000)]
        nmax: u64,
        /// Pairs per rung of the slope ladder.
        #[arg(long, default_value_t = 1_000_000)]
        pair_samples: u64,
    },
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub v: f64,
    #[arg(long, default_value_t = 48)]
    pub grid: usize,
    #[arg(long, default_value_t = DEFAULT_TAIL_TOL)]
    pub tail_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Greedy,
    Canonical,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Greedy => Convention::Greedy,
            ConventionArg::Canonical => Convention::Canonical,
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Consistency(_) | Error::BoundViolation { .. } => 3,
        _ => 1,
    }
}

/// Runs the command line `args` (including the program name), writing output
/// to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match CliConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(&cfg)) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| invalid(format!("json: {e}")))
}

fn csv_string(rows: &[CsvRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| invalid(e.to_string()))
}

fn parse_rational(s: &str) -> Result<(BigUint, BigUint)> {
    let (p, q) = s.split_once('/').ok_or_else(|| invalid(format!("expected p/q, got {s:?}")))?;
    let parse = |x: &str| x.trim().parse::<BigUint>().map_err(|_| invalid(format!("not a nonnegative integer: {x:?}")));
    Ok((parse(p)?, parse(q)?))
}

fn dispatch(cfg: &CliConfig) -> Result<String> {
    let format = if cfg.json { Format::Json } else { cfg.format };
    let no_csv = || Err(invalid("csv output is available for eigen, experiment and worstcase"));
    match &cfg.command {
        Command::Trace { p, q, convention } => {
            let trace = cl_run(p, q, (*convention).into())?;
            match format {
                Format::Json => json(&trace.to_json()),
                Format::Text => Ok(trace.to_table()),
                Format::Csv => no_csv(),
            }
        }
        Command::Expand { rational, depth } => {
            let (p, q) = parse_rational(rational)?;
            let trace = cl_run(&p, &q, Convention::Canonical)?;
            let all = trace.exponents.as_slice();
            let kept = &all[..depth.unwrap_or(all.len()).min(all.len())];
            let seq = ExponentSeq::new(kept.to_vec())?;
            let value = cf_eval(&seq);
            #[derive(Serialize)]
            struct Expansion {
                rational: String,
                exponents: Vec<u32>,
                complete: bool,
                value: String,
            }
            let e = Expansion {
                rational: format!("{p}/{q}"),
                exponents: kept.to_vec(),
                complete: kept.len() == all.len(),
                value: value.to_string(),
            };
            match format {
                Format::Json => json(&e),
                Format::Text => {
                    let (tail, label) = if e.complete { ("", "value") } else { (" ...", "prefix value") };
                    Ok(format!("{}: exponents {}{tail}, {label} {}\n", e.rational, seq, e.value))
                }
                Format::Csv => no_csv(),
            }
        }
        Command::Eval { exponents } => {
            let seq: ExponentSeq = exponents.parse()?;
            let value: Rational = cf_eval(&seq);
            let cp = continuants(&seq);
            let costs = cost_vector(&seq)?;
            match format {
                Format::Json => json(&serde_json::json!({
                    "exponents": seq.as_slice(),
                    "value": value.to_string(),
                    "continuants": cp,
                    "costs": costs,
                })),
                Format::Text => Ok(format!("{value} (P={}, Q={}, g={}, R={})\n", cp.p, cp.q, cp.g, cp.r)),
                Format::Csv => no_csv(),
            }
        }
        Command::Constants => {
            let table = m_table();
            match format {
                Format::Json => json(&table),
                Format::Text => Ok(table.to_string()),
                Format::Csv => no_csv(),
            }
        }
        Command::Eigen(a) => {
            let r = eigen(a.t, a.v, a.grid, a.tail_tol)?;
            match format {
                Format::Json => json(&r),
                Format::Csv => Ok(r.to_csv()),
                Format::Text => Ok(format!(
                    "t = {}, v = {}, grid = {}, a_max = {}\nlambda = {:.15}\nresidual = {:.3e}\niterations = {}\n",
                    r.t, r.v, r.n, r.a_max, r.lambda, r.residual, r.iterations
                )),
            }
        }
        Command::Taylor { fd_step, grid } => {
            let t = taylor_estimates(*grid, *fd_step)?;
            match format {
                Format::Json => json(&t),
                Format::Text => {
                    let (a, d) = (const_a(), const_d());
                    Ok(format!(
                        "A_est = {:.9}   A = {a:.9}   rel.err = {:.2e}\nD_est = {:.9}   D = {d:.9}   rel.err = {:.2e}\n",
                        t.a_est,
                        ((t.a_est - a) / a).abs(),
                        t.d_est,
                        ((t.d_est - d) / d).abs()
                    ))
                }
                Format::Csv => no_csv(),
            }
        }
        Command::Experiment { nmax, samples, exhaustive, all_pairs, out } => {
            let (rows, rendered) = if *exhaustive || *nmax < 1 << 16 {
                let mut spec =
                    if *exhaustive { OmegaSpec::exhaustive(*nmax) } else { OmegaSpec::sampled(*nmax, *samples, cfg.seed) };
                spec.all_pairs = *all_pairs;
                let r = mean_costs(spec)?;
                (r.csv_rows(), if format == Format::Json { json(&r)? } else { String::new() })
            } else {
                if *all_pairs {
                    return Err(invalid("--all-pairs is only available without the slope ladder"));
                }
                let r = slope_estimate(*nmax, *samples, cfg.seed)?;
                (r.csv_rows(), if format == Format::Json { json(&r)? } else { String::new() })
            };
            if let Some(path) = out {
                std::fs::write(path, csv_string(&rows)?).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            }
            match format {
                Format::Json => Ok(rendered),
                Format::Csv => csv_string(&rows),
                Format::Text => Ok(experiment_table(&rows)),
            }
        }
        Command::Dirichlet { s, nmax } => {
            let c = dirichlet_check(*s, *nmax)?;
            match format {
                Format::Json => json(&c),
                Format::Text => Ok(format!(
                    "s = {}, N = {}\npartial sum          = {:.12}\nzeta(2s-1)/zeta(2s) = {:.12}\n|difference|        = {:.3e}\n",
                    c.s, c.n, c.partial_sum, c.zeta_ratio, c.deviation
                )),
                Format::Csv => no_csv(),
            }
        }
        Command::Worstcase { nmax } => {
            let r = worstcase_scan(*nmax)?;
            if !r.bounds_hold {
                return Err(Error::BoundViolation {
                    p: "1".into(),
                    q: "2^n - 1".into(),
                    detail: "worst-case family exceeds the bound".into(),
                });
            }
            match format {
                Format::Json => json(&r),
                Format::Csv | Format::Text => {
                    let mut s = String::new();
                    if format == Format::Text {
                        let _ = writeln!(s, "{:>4} {:>8} {:>10} {:>8} {:>10}", "n", "K_greedy", "S_greedy", "K_canon", "S_canon");
                    } else {
                        s.push_str("n,k_greedy,s_greedy,k_canonical,s_canonical\n");
                    }
                    for row in &r.rows {
                        let cols = [u64::from(row.n), row.k_greedy, row.s_greedy, row.k_canonical, row.s_canonical];
                        if format == Format::Text {
                            let _ = writeln!(s, "{:>4} {:>8} {:>10} {:>8} {:>10}", cols[0], cols[1], cols[2], cols[3], cols[4]);
                        } else {
                            let _ = writeln!(s, "{},{},{},{},{}", cols[0], cols[1], cols[2], cols[3], cols[4]);
                        }
                    }
                    if format == Format::Text {
                        let _ = writeln!(
                            s,
                            "fit: K ~ {:.6} n (greedy), {:.6} n (canonical); S ~ {:.6} n^2 (greedy), {:.6} n^2 (canonical)",
                            r.alpha[0], r.alpha[1], r.gamma[0], r.gamma[1]
                        );
                    }
                    Ok(s)
                }
            }
        }
        Command::Conjecture { bits, samples, nmax, pair_samples } => {
            let r = conjecture_test(ConjectureConfig {
                bits: *bits,
                samples: *samples,
                n_max: *nmax,
                pair_samples: *pair_samples,
                seed: cfg.seed,
            })?;
            match format {
                Format::Json => json(&r),
                Format::Text => {
                    let b = &r.birkhoff;
                    Ok(format!(
                        "B + D conjectured            = {:.6}\n\
                         trajectory e2 ({} bits, {})   = {:.6} +- {:.6}\n\
                         slope(rho)/slope(K) (N = {}) = {:.6} +- {:.6}\n\
                         B from trajectories          = {:.6}\n\
                         B from slopes                = {:.6}\n\
                         D - B (trajectories)         = {:.6}\n\
                         D - B (slopes)               = {:.6}\n\
                         log 2                        = {:.6}\n\
                         agreement                    = {:.2} combined standard errors\n\
                         e2 extrapolated in 1/bits    = {:.6}\n\
                         verdict: {}\n",
                        r.conjectured,
                        b.bits,
                        b.samples,
                        b.estimates.e2,
                        b.std_errors.e2,
                        r.slope_n_max,
                        r.slope_rho_ratio,
                        r.slope_rho_stderr,
                        r.b_from_birkhoff,
                        r.b_from_slope,
                        r.d_minus_b_birkhoff,
                        r.d_minus_b_slope,
                        r.log2,
                        r.agreement_z,
                        r.e2_extrapolated,
                        if r.consistent { "consistent with D - B = log 2" } else { "not consistent with D - B = log 2" }
                    ))
                }
                Format::Csv => no_csv(),
            }
        }
    }
}

fn experiment_table(rows: &[CsvRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>9} {:<10} {:>8} {:<5} {:>12} {:>10} {:>10} {:>12} {:>10}",
        "N", "mode", "samples", "cost", "mean", "stderr", "ratio_K", "theory", "deviation"
    );
    for r in rows {
        let cost = Cost::ALL.iter().find(|c| c.name() == r.cost).expect("known cost");
        let star = if cost.conjectural() { "*" } else { "" };
        let _ = writeln!(
            s,
            "{:>9} {:<10} {:>8} {:<5} {:>12.6} {:>10.6} {:>10.6} {:>12.6} {:>+10.4}",
            r.n,
            r.mode,
            r.samples,
            format!("{}{star}", r.cost),
            r.mean,
            r.stderr,
            r.ratio_to_k,
            r.theory,
            r.deviation
        );
    }
    s.push_str("theory: mean ~ M(c) (2/H) log N, slope ~ M(c) 2/H; * uses the conjectured B\n");
    s
}
