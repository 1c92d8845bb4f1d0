//! Command-line surface for the cross-polytope Ehrhart root analysis:
//! exact polynomials, certified critical-line roots, asymptotic values,
//! argument-variation counting, largest-root prediction, and the
//! largest-root table.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crosspoly::counting::{build_counting_curve, count_roots_asymptotic, largest_root_estimate};
use crosspoly::critline::{all_roots, count_ordinates_closed, critical_line_polynomial, largest_root};
use crosspoly::ehrhart::build_ehrhart;
use crosspoly::saddle::{asymptotic_f, Regime};
use crosspoly::{decimal_digits, format_fixed, DEFAULT_EPSILON, DEFAULT_PRECISION, MIN_PRECISION};

/// Dimensions above this need --slow for exact-root work.
const SLOW_DIM: u32 = 300;

#[derive(Parser)]
#[command(
    name = "crosspoly",
    version,
    about = "Exact and asymptotic root analysis for the cross-polytope Ehrhart polynomial"
)]
struct Cli {
    /// Working precision in bits (>= 64); overrides CROSSPOLY_PRECISION
    #[arg(long, global = true)]
    precision: Option<u32>,

    /// Strip margin for the asymptotic evaluator, in (0, 0.5)
    #[arg(long, global = true)]
    epsilon: Option<f64>,

    /// Directory to write output files into (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format where both make sense
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Allow long exact-root computations (dimension > 300)
    #[arg(long, global = true)]
    slow: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the exact Ehrhart polynomial as JSON
    Poly {
        #[arg(long)]
        dim: u32,
    },
    /// Certified critical-line roots as CSV (tau, err_radius)
    Roots {
        #[arg(long)]
        dim: u32,
    },
    /// One asymptotic evaluation of the critical-line term as JSON
    Asym {
        #[arg(long)]
        dim: u32,
        /// Ordinate Im x
        #[arg(long)]
        tau: String,
        /// Re x, inside (epsilon, 1 - epsilon)
        #[arg(long, default_value = "0.5")]
        sigma: String,
    },
    /// Root counts on [from, to]: exact (Sturm) and asymptotic
    Count {
        #[arg(long)]
        dim: u32,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value = "0.25")]
        step: String,
    },
    /// Exact-vs-asymptotic counting curve as CSV (tau, exact, asym, err)
    Compare {
        #[arg(long)]
        dim: u32,
        #[arg(long)]
        max: f64,
        #[arg(long)]
        step: f64,
    },
    /// Largest-root prediction from the phase equation, as JSON
    Largest {
        #[arg(long)]
        dim: u32,
        /// Also compute the certified exact largest root
        #[arg(long)]
        check_exact: bool,
    },
    /// Largest-root table rows d,tau_max,f_over_cbrt (10 decimals)
    Table1 {
        /// Comma-separated dimensions, e.g. 100,200,300
        #[arg(long, default_value = "")]
        dims: String,
    },
}

struct RunConfig {
    precision: u32,
    epsilon: f64,
    out_dir: Option<PathBuf>,
    format: Option<Format>,
    slow: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let precision = match resolve_precision(cli.precision) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::FAILURE;
        }
    };
    let epsilon = cli.epsilon.unwrap_or(DEFAULT_EPSILON);
    if !(epsilon > 0.0 && epsilon < 0.5) {
        eprintln!("error: epsilon must lie in (0, 0.5), got {epsilon}");
        return ExitCode::FAILURE;
    }
    let config = RunConfig {
        precision,
        epsilon,
        out_dir: cli.out,
        format: cli.format,
        slow: cli.slow,
    };
    match run(&cli.cmd, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn resolve_precision(flag: Option<u32>) -> Result<u32, String> {
    let p = match flag {
        Some(p) => p,
        None => match std::env::var("CROSSPOLY_PRECISION") {
            Ok(v) => v
                .parse::<u32>()
                .map_err(|_| format!("CROSSPOLY_PRECISION is not a number: {v}"))?,
            Err(_) => DEFAULT_PRECISION,
        },
    };
    if p < MIN_PRECISION {
        return Err(format!("precision must be at least {MIN_PRECISION} bits, got {p}"));
    }
    Ok(p)
}

fn require_fast_or_slow(d: u32, slow: bool, what: &str) -> Result<(), String> {
    if d > SLOW_DIM && !slow {
        return Err(format!(
            "{what} for dimension {d} exceeds the default budget; pass --slow to allow it"
        ));
    }
    Ok(())
}

fn run(cmd: &Cmd, config: &RunConfig) -> Result<(), String> {
    match cmd {
        Cmd::Poly { dim } => {
            let p = build_ehrhart(*dim);
            emit(config, &format!("poly_d{dim}.json"), &(p.to_json() + "\n"))
        }
        Cmd::Roots { dim } => {
            if *dim == 0 {
                return Err("roots need dimension >= 1".into());
            }
            require_fast_or_slow(*dim, config.slow, "exact root isolation")?;
            let rs = all_roots(*dim, config.precision).map_err(|e| e.to_string())?;
            let body = match config.format {
                Some(Format::Json) => roots_json(&rs),
                _ => rs.to_csv(),
            };
            let name = match config.format {
                Some(Format::Json) => format!("roots_d{dim}.json"),
                _ => format!("roots_d{dim}.csv"),
            };
            emit(config, &name, &body)
        }
        Cmd::Asym { dim, tau, sigma } => {
            let prec = config.precision;
            let tau = parse_float(tau, prec)?;
            let sigma = parse_float(sigma, prec)?;
            let x = Complex::with_val(prec, (sigma, tau));
            let v = asymptotic_f(*dim, &x, config.epsilon).map_err(|e| e.to_string())?;
            let digits = decimal_digits(prec).min(40);
            let sci = |f: &Float| format!("{:.*e}", digits, f);
            let mut body = format!(
                "{{\"d\": {dim}, \"x\": [{}, {}], \"regime\": \"{}\", \"value\": [{}, {}]",
                sci(x.real()),
                sci(x.imag()),
                match v.regime {
                    Regime::NearZero => "NEAR_ZERO",
                    Regime::Saddle => "SADDLE",
                },
                sci(v.value.real()),
                sci(v.value.imag()),
            );
            if v.regime == Regime::Saddle {
                let sd = crosspoly::saddle::saddle_point(*dim, x.imag())
                    .map_err(|e| e.to_string())?;
                let i_val = crosspoly::saddle::integral_i(&sd).map_err(|e| e.to_string())?;
                body.push_str(&format!(
                    ", \"alpha\": [0, {}], \"K2\": {}, \"K3\": {}, \"I\": [{}, {}]",
                    sci(sd.alpha.imag()),
                    sci(&sd.k2),
                    sci(&sd.k3),
                    sci(i_val.real()),
                    sci(i_val.imag()),
                ));
            }
            body.push_str("}\n");
            emit(config, &format!("asym_d{dim}.json"), &body)
        }
        Cmd::Count { dim, from, to, step } => {
            let prec = config.precision;
            let a = parse_float(from, prec)?;
            let b = parse_float(to, prec)?;
            let h = parse_float(step, prec)?;
            if a > b {
                return Err("--from must not exceed --to".into());
            }
            let asym = count_roots_asymptotic(*dim, &a, &b, &h).map_err(|e| e.to_string())?;
            let exact: Option<usize> = if *dim <= SLOW_DIM || config.slow {
                let r = critical_line_polynomial(*dim).map_err(|e| e.to_string())?;
                let qa = parse_rational(from)?;
                let qb = parse_rational(to)?;
                Some(count_ordinates_closed(&r, &qa, &qb).map_err(|e| e.to_string())?)
            } else {
                None
            };
            let body = format!(
                "{{\"d\": {dim}, \"a\": {}, \"b\": {}, \"exact\": {}, \"asym\": {}}}\n",
                format_fixed(&a, 6),
                format_fixed(&b, 6),
                exact.map_or("null".into(), |n| n.to_string()),
                format_fixed(&asym, 6),
            );
            emit(config, &format!("count_d{dim}.json"), &body)
        }
        Cmd::Compare { dim, max, step } => {
            if *dim == 0 {
                return Err("compare needs dimension >= 1".into());
            }
            if !(*step > 0.0) {
                return Err("--step must be positive".into());
            }
            require_fast_or_slow(*dim, config.slow, "the exact side of the comparison")?;
            let roots = all_roots(*dim, config.precision).map_err(|e| e.to_string())?;
            let curve = build_counting_curve(*dim, *max, *step, config.precision, &roots)
                .map_err(|e| e.to_string())?;
            emit(
                config,
                &format!("counting_d{dim}.csv"),
                &curve.to_csv(config.precision),
            )
        }
        Cmd::Largest { dim, check_exact } => {
            let est = largest_root_estimate(*dim, config.precision).map_err(|e| e.to_string())?;
            let exact = if *check_exact {
                require_fast_or_slow(*dim, config.slow, "the exact cross-check")?;
                Some(largest_root(*dim, config.precision).map_err(|e| e.to_string())?)
            } else {
                None
            };
            let body = format!(
                "{{\"d\": {dim}, \"tau_hat\": {}, \"tau_exact\": {}, \"f_over_cbrt\": {}}}\n",
                format_fixed(&est.tau_hat, 10),
                exact.map_or("null".into(), |r| format_fixed(&r.value, 10)),
                format_fixed(&est.scaled, 10),
            );
            emit(config, &format!("largest_d{dim}.json"), &body)
        }
        Cmd::Table1 { dims } => {
            let dims = parse_dims(dims)?;
            let mut body = String::from("d,tau_max,f_over_cbrt\n");
            for d in dims {
                if d == 0 {
                    return Err("table rows need dimension >= 1".into());
                }
                require_fast_or_slow(d, config.slow, "the exact largest root")?;
                let root = largest_root(d, config.precision).map_err(|e| e.to_string())?;
                let prec = config.precision;
                let f = Float::with_val(prec, d) - &root.value;
                let scaled = f / Float::with_val(prec, d).root(3);
                body.push_str(&format!(
                    "{d},{},{}\n",
                    format_fixed(&root.value, 10),
                    format_fixed(&scaled, 10)
                ));
            }
            emit(config, "table1.csv", &body)
        }
    }
}

fn roots_json(rs: &crosspoly::critline::RootSet) -> String {
    let digits = decimal_digits(rs.precision());
    let rows: Vec<String> = rs
        .full_ordinates()
        .iter()
        .map(|t| format!("{}", format_fixed(t, digits)))
        .collect();
    format!(
        "{{\"dim\": {}, \"precision\": {}, \"tau\": [{}]}}\n",
        rs.dim(),
        rs.precision(),
        rows.join(", ")
    )
}

fn parse_float(s: &str, prec: u32) -> Result<Float, String> {
    Float::parse(s)
        .map(|v| Float::with_val(prec, v))
        .map_err(|_| format!("not a number: {s}"))
}

/// Exact rational from a plain decimal string.
fn parse_rational(s: &str) -> Result<Rational, String> {
    let t = s.trim();
    let (sign, t) = match t.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, t),
    };
    let (int_part, frac_part) = match t.split_once('.') {
        Some((i, f)) => (i, f),
        None => (t, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("not a number: {s}"));
    }
    let digits = format!("{}{}", int_part, frac_part);
    let n: Integer = digits
        .parse()
        .map_err(|_| format!("not a plain decimal: {s}"))?;
    let den = Integer::from(10).pow(frac_part.len() as u32);
    Ok(Rational::from((n * sign, den)))
}

fn parse_dims(s: &str) -> Result<Vec<u32>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| format!("bad dimension list entry: {part}"))
        })
        .collect()
}

fn emit(config: &RunConfig, name: &str, body: &str) -> Result<(), String> {
    match &config.out_dir {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
            let path: &Path = &dir.join(name);
            std::fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
    }
}
