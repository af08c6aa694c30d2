//! Command-line surface. Every data-producing subcommand emits JSON (default)
//! or CSV on stdout; numbers are printed with 17 significant digits so output
//! round-trips bit-exactly. Exit codes: 0 success, 1 validation error with a
//! single-line `error: <field>: <reason>` on stderr, 2 series non-convergence.

use crate::asymptotics::{verify_case, default_schedule, ConvergenceReport, LimitCase};
use crate::density::density_grid;
use crate::error::CevError;
use crate::greeks::{full_report, pde_residual, GreeksReport};
use crate::model::CevParams;
use crate::oracle::{fd_derivative, mc_price, SdeConfig};
use crate::pricing::{price, OptionKind};
use crate::specfun::SeriesControl;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;

/// Exactly 17 significant digits; infinities as bare words (quoted in JSON
/// by the callers that can produce them).
pub fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThetaConvention {
    /// Calendar time, d/dt (the reported default).
    T,
    /// Time to expiry, d/dtau (negated).
    Tau,
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// JSON file with {"spot","strike","rate","delta_vol","beta","tau"};
    /// explicit flags override file values
    #[arg(long, global = true)]
    params: Option<std::path::PathBuf>,
    #[arg(long, global = true)]
    spot: Option<f64>,
    #[arg(long, global = true)]
    strike: Option<f64>,
    #[arg(long, global = true)]
    rate: Option<f64>,
    #[arg(long, global = true)]
    delta_vol: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Output format
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Parser)]
#[command(
    name = "cev",
    disable_help_subcommand = true,
    about = "European option prices, Greeks, risk-neutral density and limit \
             verification under the constant-elasticity-of-variance model"
)]
struct Cli {
    #[command(flatten)]
    params: ParamArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Call and put prices plus the put-call parity gap
    Price,
    /// Price and the five Greeks for one option kind
    Greeks {
        #[arg(long, value_enum, default_value = "call")]
        kind: OptionKind,
        #[arg(long, value_enum, default_value = "t")]
        theta_convention: ThetaConvention,
    },
    /// Risk-neutral terminal density on a log-spaced grid
    Density {
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 201)]
        n: usize,
    },
    /// Verify the asymptotic limits of one regime
    Limits {
        /// Regime: a tau->0, b sigma->inf, c strike->inf, d rate->inf, e maturity->inf
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Cross-check closed forms against Monte Carlo and finite differences
    Verify {
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Per-strike price/Greeks grid
    Smile {
        /// Comma-separated strikes
        #[arg(long, value_delimiter = ',', required = true)]
        strikes: Vec<f64>,
    },
}

fn resolve_params(a: &ParamArgs) -> Result<CevParams<f64>, CevError> {
    let mut file: Option<CevParams<f64>> = None;
    if let Some(path) = &a.params {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CevError::domain("params", format!("cannot read file: {e}")))?;
        file = Some(
            serde_json::from_str(&text)
                .map_err(|e| CevError::domain("params", format!("invalid JSON: {e}")))?,
        );
    }
    let get = |flag: Option<f64>, from_file: Option<f64>, name: &'static str| {
        flag.or(from_file)
            .ok_or_else(|| CevError::domain(name, "missing (provide a flag or --params file)"))
    };
    let f = file.as_ref();
    let p = CevParams {
        spot: get(a.spot, f.map(|p| p.spot), "spot")?,
        strike: get(a.strike, f.map(|p| p.strike), "strike")?,
        rate: get(a.rate, f.map(|p| p.rate), "rate")?,
        delta_vol: get(a.delta_vol, f.map(|p| p.delta_vol), "delta_vol")?,
        beta: get(a.beta, f.map(|p| p.beta), "beta")?,
        tau: get(a.tau, f.map(|p| p.tau), "tau")?,
    };
    p.validate()?;
    Ok(p)
}

fn greeks_json(g: &GreeksReport<f64>) -> String {
    format!(
        "{{\"price\":{},\"delta\":{},\"gamma\":{},\"theta\":{},\"vega\":{},\"rho\":{}}}",
        fmt_f(g.price),
        fmt_f(g.delta),
        fmt_f(g.gamma),
        fmt_f(g.theta),
        fmt_f(g.vega),
        fmt_f(g.rho)
    )
}

/// Serialize a parsed report exactly as `greeks` emits it (used by the
/// byte-identical round-trip contract).
pub fn greeks_to_json(g: &GreeksReport<f64>) -> String {
    greeks_json(g)
}

fn run_price(p: &CevParams<f64>, format: Format) -> Result<String, CevError> {
    let call = price(p, OptionKind::Call)?;
    let put = price(p, OptionKind::Put)?;
    let gap = call - put - (p.spot - p.strike * p.discount());
    Ok(match format {
        Format::Json => format!(
            "{{\"call\":{},\"put\":{},\"parity_gap\":{}}}",
            fmt_f(call),
            fmt_f(put),
            fmt_f(gap)
        ),
        Format::Csv => format!(
            "call,put,parity_gap\n{},{},{}",
            fmt_f(call),
            fmt_f(put),
            fmt_f(gap)
        ),
    })
}

fn run_greeks(
    p: &CevParams<f64>,
    kind: OptionKind,
    conv: ThetaConvention,
    format: Format,
) -> Result<String, CevError> {
    let mut g = full_report(p, kind)?;
    if conv == ThetaConvention::Tau {
        g.theta = -g.theta;
    }
    Ok(match format {
        Format::Json => greeks_json(&g),
        Format::Csv => format!(
            "price,delta,gamma,theta,vega,rho\n{},{},{},{},{},{}",
            fmt_f(g.price),
            fmt_f(g.delta),
            fmt_f(g.gamma),
            fmt_f(g.theta),
            fmt_f(g.vega),
            fmt_f(g.rho)
        ),
    })
}

fn run_density(
    p: &CevParams<f64>,
    lo: f64,
    hi: f64,
    n: usize,
    format: Format,
) -> Result<String, CevError> {
    let grid = density_grid(p, lo, hi, n, &SeriesControl::default())?;
    Ok(match format {
        Format::Json => {
            let pts: Vec<String> = grid
                .points
                .iter()
                .map(|pt| format!("{{\"s_t\":{},\"phi\":{}}}", fmt_f(pt.s_t), fmt_f(pt.phi)))
                .collect();
            format!(
                "{{\"points\":[{}],\"mass\":{},\"absorbed_mass\":{}}}",
                pts.join(","),
                fmt_f(grid.mass),
                fmt_f(grid.absorbed_mass)
            )
        }
        Format::Csv => {
            let mut out = String::from("s_T,phi");
            for pt in &grid.points {
                out.push('\n');
                out.push_str(&fmt_f(pt.s_t));
                out.push(',');
                out.push_str(&fmt_f(pt.phi));
            }
            out
        }
    })
}

fn limit_str(l: crate::asymptotics::Limit) -> String {
    match l {
        crate::asymptotics::Limit::Finite(v) => fmt_f(v),
        crate::asymptotics::Limit::PosInf => "inf".to_string(),
        crate::asymptotics::Limit::NegInf => "-inf".to_string(),
    }
}

fn limits_json(reports: &[ConvergenceReport]) -> String {
    let items: Vec<String> = reports
        .iter()
        .map(|r| {
            let lim = match r.limit {
                crate::asymptotics::Limit::Finite(v) => fmt_f(v),
                crate::asymptotics::Limit::PosInf => "\"inf\"".to_string(),
                crate::asymptotics::Limit::NegInf => "\"-inf\"".to_string(),
            };
            let join = |v: &[f64]| {
                v.iter()
                    .map(|x| fmt_f(*x))
                    .collect::<Vec<_>>()
                    .join(",")
            };
            format!(
                "{{\"case\":\"{}\",\"quantity\":\"{}\",\"limit\":{},\"schedule\":[{}],\
                 \"observed\":[{}],\"errors\":[{}],\"verdict\":\"{}\"}}",
                r.case.letter(),
                r.quantity,
                lim,
                join(&r.schedule),
                join(&r.observed),
                join(&r.errors),
                verdict_str(r.verdict)
            )
        })
        .collect();
    format!("[{}]", items.join(","))
}

fn verdict_str(v: crate::asymptotics::Verdict) -> &'static str {
    match v {
        crate::asymptotics::Verdict::Converged => "converged",
        crate::asymptotics::Verdict::DivergedAsExpected => "diverged_as_expected",
        crate::asymptotics::Verdict::Failed => "FAILED",
    }
}

fn run_limits(p: &CevParams<f64>, case: &str, tol: f64, format: Format) -> Result<String, CevError> {
    let case = LimitCase::from_letter(case)
        .ok_or_else(|| CevError::domain("case", "must be one of a, b, c, d, e"))?;
    let schedule = default_schedule(case, p);
    let reports = verify_case(case, p, &schedule, tol)?;
    let any_failed = reports
        .iter()
        .any(|r| r.verdict == crate::asymptotics::Verdict::Failed);
    let body = match format {
        Format::Json => limits_json(&reports),
        Format::Csv => {
            let mut out = String::from("case,quantity,limit,final_value,final_error,verdict");
            for r in &reports {
                out.push_str(&format!(
                    "\n{},{},{},{},{},{}",
                    r.case.letter(),
                    r.quantity,
                    limit_str(r.limit),
                    fmt_f(*r.observed.last().unwrap()),
                    fmt_f(*r.errors.last().unwrap()),
                    verdict_str(r.verdict)
                ));
            }
            out
        }
    };
    if any_failed {
        // surface the table, then fail the process via a validation error
        println!("{body}");
        return Err(CevError::domain("limits", "one or more quantities FAILED"));
    }
    Ok(body)
}

fn run_verify(
    p: &CevParams<f64>,
    paths: usize,
    steps: usize,
    seed: u64,
    format: Format,
) -> Result<String, CevError> {
    let closed = price(p, OptionKind::Call)?;
    let cfg = SdeConfig::risk_neutral(p, paths, steps, seed);
    let mc = mc_price(p, OptionKind::Call, &cfg)?;
    let mc_error = (mc.mean - closed).abs();
    let g = full_report(p, OptionKind::Call)?;
    let h_s = p.spot * 1e-4;
    let fd_delta = fd_derivative(
        |s| {
            let mut q = *p;
            q.spot = s;
            price(&q, OptionKind::Call)
        },
        p.spot,
        h_s,
        1,
    )?;
    let fd_gamma = fd_derivative(
        |s| {
            let mut q = *p;
            q.spot = s;
            price(&q, OptionKind::Call)
        },
        p.spot,
        p.spot * 1e-3,
        2,
    )?;
    let residual = pde_residual(p, OptionKind::Call)?;
    let fields: Vec<(&str, String)> = vec![
        ("closed_form", fmt_f(closed)),
        ("mc_mean", fmt_f(mc.mean)),
        ("mc_std_error", fmt_f(mc.std_error)),
        ("mc_abs_error", fmt_f(mc_error)),
        ("mc_absorbed_fraction", fmt_f(mc.absorbed_fraction)),
        ("fd_delta_error", fmt_f((fd_delta - g.delta).abs())),
        ("fd_gamma_error", fmt_f((fd_gamma - g.gamma).abs())),
        ("pde_residual", fmt_f(residual)),
    ];
    Ok(match format {
        Format::Json => {
            let items: Vec<String> = fields
                .iter()
                .map(|(k, v)| format!("\"{k}\":{v}"))
                .collect();
            format!("{{{}}}", items.join(","))
        }
        Format::Csv => {
            let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let row: Vec<String> = fields.iter().map(|(_, v)| v.clone()).collect();
            format!("{}\n{}", header.join(","), row.join(","))
        }
    })
}

fn run_smile(p: &CevParams<f64>, strikes: &[f64], format: Format) -> Result<String, CevError> {
    if strikes.is_empty() {
        return Err(CevError::domain("strikes", "need at least one strike"));
    }
    let mut rows = Vec::with_capacity(strikes.len());
    for &k in strikes {
        let mut q = *p;
        q.strike = k;
        q.validate()?;
        let c = full_report(&q, OptionKind::Call)?;
        let pu = full_report(&q, OptionKind::Put)?;
        rows.push((k, c, pu));
    }
    const COLS: [&str; 11] = [
        "strike",
        "call",
        "put",
        "delta_call",
        "delta_put",
        "gamma",
        "theta_call",
        "theta_put",
        "vega",
        "rho_call",
        "rho_put",
    ];
    let values = |k: f64, c: &GreeksReport<f64>, pu: &GreeksReport<f64>| {
        vec![
            fmt_f(k),
            fmt_f(c.price),
            fmt_f(pu.price),
            fmt_f(c.delta),
            fmt_f(pu.delta),
            fmt_f(c.gamma),
            fmt_f(c.theta),
            fmt_f(pu.theta),
            fmt_f(c.vega),
            fmt_f(c.rho),
            fmt_f(pu.rho),
        ]
    };
    Ok(match format {
        Format::Json => {
            let items: Vec<String> = rows
                .iter()
                .map(|(k, c, pu)| {
                    let vals = values(*k, c, pu);
                    let fields: Vec<String> = COLS
                        .iter()
                        .zip(&vals)
                        .map(|(name, v)| format!("\"{name}\":{v}"))
                        .collect();
                    format!("{{{}}}", fields.join(","))
                })
                .collect();
            format!("[{}]", items.join(","))
        }
        Format::Csv => {
            let mut out = COLS.join(",");
            for (k, c, pu) in &rows {
                out.push('\n');
                out.push_str(&values(*k, c, pu).join(","));
            }
            out
        }
    })
}

/// Parse and dispatch; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            // help/version requests are not errors
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: args: {first}");
            return 1;
        }
    };
    let format = cli.params.format;
    let result = resolve_params(&cli.params).and_then(|p| match &cli.cmd {
        Cmd::Price => run_price(&p, format),
        Cmd::Greeks {
            kind,
            theta_convention,
        } => run_greeks(&p, *kind, *theta_convention, format),
        Cmd::Density { lo, hi, n } => run_density(&p, *lo, *hi, *n, format),
        Cmd::Limits { case, tol } => run_limits(&p, case, *tol, format),
        Cmd::Verify { paths, steps, seed } => run_verify(&p, *paths, *steps, *seed, format),
        Cmd::Smile { strikes } => run_smile(&p, strikes, format),
    });
    match result {
        Ok(body) => {
            println!("{body}");
            0
        }
        Err(CevError::Domain { field, reason }) => {
            eprintln!("error: {field}: {reason}");
            1
        }
        Err(e @ CevError::NonConvergence { .. }) => {
            eprintln!("error: series: {e}");
            2
        }
    }
}
