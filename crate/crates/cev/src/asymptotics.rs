//! Closed-form limit tables for the five asymptotic regimes of the model
//! (short maturity, exploding volatility, exploding strike, exploding rate,
//! long maturity) and a numerical harness that drives the pricing and Greek
//! operations along a parameter schedule and checks convergence against the
//! tables.

use crate::error::{CevError, Result};
use crate::greeks::full_report;
use crate::model::CevParams;
use serde::Serialize;
use std::fmt;

/// The asymptotic regime. The CLI letters a-e map in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitCase {
    /// Case a: time to expiry shrinks to zero.
    TauToZero,
    /// Case b: instantaneous volatility explodes (driven through delta_vol).
    SigmaToInf,
    /// Case c: strike explodes.
    StrikeToInf,
    /// Case d: risk-free rate explodes.
    RateToInf,
    /// Case e: maturity grows without bound (driven through tau).
    MaturityToInf,
}

impl LimitCase {
    pub fn from_letter(s: &str) -> Option<Self> {
        match s {
            "a" => Some(LimitCase::TauToZero),
            "b" => Some(LimitCase::SigmaToInf),
            "c" => Some(LimitCase::StrikeToInf),
            "d" => Some(LimitCase::RateToInf),
            "e" => Some(LimitCase::MaturityToInf),
            _ => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            LimitCase::TauToZero => 'a',
            LimitCase::SigmaToInf => 'b',
            LimitCase::StrikeToInf => 'c',
            LimitCase::RateToInf => 'd',
            LimitCase::MaturityToInf => 'e',
        }
    }
}

/// The ten tracked quantities: both option prices and the Greeks (gamma and
/// vega coincide for calls and puts, so each appears once).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Call,
    Put,
    DeltaCall,
    DeltaPut,
    Gamma,
    ThetaCall,
    ThetaPut,
    Vega,
    RhoCall,
    RhoPut,
}

pub const QUANTITIES: [Quantity; 10] = [
    Quantity::Call,
    Quantity::Put,
    Quantity::DeltaCall,
    Quantity::DeltaPut,
    Quantity::Gamma,
    Quantity::ThetaCall,
    Quantity::ThetaPut,
    Quantity::Vega,
    Quantity::RhoCall,
    Quantity::RhoPut,
];

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Quantity::Call => "call",
            Quantity::Put => "put",
            Quantity::DeltaCall => "delta_call",
            Quantity::DeltaPut => "delta_put",
            Quantity::Gamma => "gamma",
            Quantity::ThetaCall => "theta_call",
            Quantity::ThetaPut => "theta_put",
            Quantity::Vega => "vega",
            Quantity::RhoCall => "rho_call",
            Quantity::RhoPut => "rho_put",
        };
        f.write_str(s)
    }
}

/// A limit value: finite, or a signed infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit {
    Finite(f64),
    PosInf,
    NegInf,
}

impl Serialize for Limit {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Limit::Finite(v) => ser.serialize_f64(*v),
            Limit::PosInf => ser.serialize_str("inf"),
            Limit::NegInf => ser.serialize_str("-inf"),
        }
    }
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::Finite(v) => write!(f, "{v}"),
            Limit::PosInf => f.write_str("inf"),
            Limit::NegInf => f.write_str("-inf"),
        }
    }
}

/// The full ten-quantity limit table for one case.
#[derive(Debug, Clone, Serialize)]
pub struct LimitTable {
    pub case: LimitCase,
    pub entries: Vec<(Quantity, Limit)>,
}

impl LimitTable {
    pub fn get(&self, q: Quantity) -> Limit {
        self.entries
            .iter()
            .find(|(qq, _)| *qq == q)
            .map(|(_, l)| *l)
            .expect("table covers all quantities")
    }
}

/// The analytic limits of all ten quantities for `case`, at the held-fixed
/// parameters in `p` (the driven parameter's value in `p` is irrelevant).
pub fn limit_table(case: LimitCase, p: &CevParams<f64>) -> Result<LimitTable> {
    p.validate()?;
    use Limit::*;
    use Quantity::*;
    let (s, k, r, tau) = (p.spot, p.strike, p.rate, p.tau);
    let entries: Vec<(Quantity, Limit)> = match case {
        LimitCase::TauToZero => {
            if s == k {
                return Err(CevError::domain(
                    "spot",
                    "short-expiry limits require spot != strike; the at-the-money \
                     indicator-function branch is undefined",
                ));
            }
            let itm = s > k; // call in the money
            vec![
                (Call, Finite((s - k).max(0.0))),
                (Put, Finite((k - s).max(0.0))),
                (DeltaCall, Finite(if itm { 1.0 } else { 0.0 })),
                (DeltaPut, Finite(if itm { 0.0 } else { -1.0 })),
                (Gamma, Finite(0.0)),
                (ThetaCall, Finite(if itm { -r * k } else { 0.0 })),
                (ThetaPut, Finite(if itm { 0.0 } else { r * k })),
                (Vega, Finite(0.0)),
                (RhoCall, Finite(0.0)),
                (RhoPut, Finite(0.0)),
            ]
        }
        LimitCase::SigmaToInf => {
            let disc = (-r * tau).exp();
            vec![
                (Call, Finite(s)),
                (Put, Finite(k * disc)),
                (DeltaCall, Finite(1.0)),
                (DeltaPut, Finite(0.0)),
                (Gamma, Finite(0.0)),
                (ThetaCall, Finite(0.0)),
                (ThetaPut, Finite(r * k * disc)),
                (Vega, Finite(0.0)),
                (RhoCall, Finite(0.0)),
                (RhoPut, Finite(-k * tau * disc)),
            ]
        }
        LimitCase::StrikeToInf => vec![
            (Call, Finite(0.0)),
            (Put, PosInf),
            (DeltaCall, Finite(0.0)),
            (DeltaPut, Finite(-1.0)),
            (Gamma, Finite(0.0)),
            (ThetaCall, Finite(0.0)),
            (ThetaPut, PosInf),
            (Vega, Finite(0.0)),
            (RhoCall, Finite(0.0)),
            (RhoPut, NegInf),
        ],
        LimitCase::RateToInf | LimitCase::MaturityToInf => vec![
            (Call, Finite(s)),
            (Put, Finite(0.0)),
            (DeltaCall, Finite(1.0)),
            (DeltaPut, Finite(0.0)),
            (Gamma, Finite(0.0)),
            (ThetaCall, Finite(0.0)),
            (ThetaPut, Finite(0.0)),
            (Vega, Finite(0.0)),
            (RhoCall, Finite(0.0)),
            (RhoPut, Finite(0.0)),
        ],
    };
    Ok(LimitTable { case, entries })
}

/// Default geometric schedule for the driven parameter of each case.
pub fn default_schedule(case: LimitCase, p: &CevParams<f64>) -> Vec<f64> {
    match case {
        // extended to 1e-6 so the rho error (~ K*tau for small tau) clears
        // the default tolerance with margin
        LimitCase::TauToZero => vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
        // errors decay like delta^-2; the extra decade gives the tight-tol
        // CLI check headroom
        LimitCase::SigmaToInf => vec![1e2, 1e3, 1e4, 1e5, 1e6],
        LimitCase::StrikeToInf => [2.0, 4.0, 8.0, 16.0, 32.0]
            .iter()
            .map(|f| f * p.strike)
            .collect(),
        LimitCase::RateToInf => vec![1.25, 2.5, 5.0, 10.0, 20.0],
        // e^{-r tau} discounting delays put-rho convergence (tau e^{-r tau}
        // peaks at tau = 1/r), so the schedule runs well past that peak
        LimitCase::MaturityToInf => vec![25.0, 50.0, 100.0, 200.0, 400.0],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    DivergedAsExpected,
    Failed,
}

/// Per-quantity convergence record: the parameter schedule actually used,
/// the observed values, and the errors against the analytic limit (for
/// infinite limits, the reciprocal magnitudes `1/|value|`).
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub case: LimitCase,
    pub quantity: Quantity,
    pub limit: Limit,
    pub schedule: Vec<f64>,
    pub observed: Vec<f64>,
    pub errors: Vec<f64>,
    pub verdict: Verdict,
}

fn pick(report: &crate::greeks::GreeksReport<f64>, put: &crate::greeks::GreeksReport<f64>, q: Quantity) -> f64 {
    match q {
        Quantity::Call => report.price,
        Quantity::Put => put.price,
        Quantity::DeltaCall => report.delta,
        Quantity::DeltaPut => put.delta,
        Quantity::Gamma => report.gamma,
        Quantity::ThetaCall => report.theta,
        Quantity::ThetaPut => put.theta,
        Quantity::Vega => report.vega,
        Quantity::RhoCall => report.rho,
        Quantity::RhoPut => put.rho,
    }
}

fn apply(case: LimitCase, p: &CevParams<f64>, value: f64) -> CevParams<f64> {
    let mut q = *p;
    match case {
        LimitCase::TauToZero | LimitCase::MaturityToInf => q.tau = value,
        LimitCase::SigmaToInf => q.delta_vol = value,
        LimitCase::StrikeToInf => q.strike = value,
        LimitCase::RateToInf => q.rate = value,
    }
    q
}

/// Run the convergence check for every quantity of `case`. `p` supplies the
/// held-fixed parameters; `schedule` is the driven-parameter sequence
/// (strictly monotone toward the limit point, at least 4 steps). If a series
/// evaluation fails to converge partway through, the schedule is truncated
/// at the last convergent point and the criteria are applied there.
pub fn verify_case(
    case: LimitCase,
    p: &CevParams<f64>,
    schedule: &[f64],
    tol: f64,
) -> Result<Vec<ConvergenceReport>> {
    if schedule.len() < 4 {
        return Err(CevError::domain("schedule", "need at least 4 steps"));
    }
    let toward_zero = matches!(case, LimitCase::TauToZero);
    for pair in schedule.windows(2) {
        let ok = if toward_zero {
            pair[1] < pair[0]
        } else {
            pair[1] > pair[0]
        };
        if !ok {
            return Err(CevError::domain(
                "schedule",
                "must be strictly monotone toward the limit point",
            ));
        }
    }
    if !(tol > 0.0) {
        return Err(CevError::domain("tol", "must be > 0"));
    }
    let table = limit_table(case, p)?;

    // evaluate the full report sequence once, truncating on non-convergence
    let mut used = Vec::new();
    let mut reports = Vec::new();
    for &value in schedule {
        let at = apply(case, p, value);
        at.validate()?;
        let call = full_report(&at, crate::pricing::OptionKind::Call);
        let put = full_report(&at, crate::pricing::OptionKind::Put);
        match (call, put) {
            (Ok(c), Ok(pu)) => {
                used.push(value);
                reports.push((c, pu));
            }
            (Err(CevError::NonConvergence { .. }), _) | (_, Err(CevError::NonConvergence { .. })) => {
                break;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    if used.len() < 2 {
        return Err(CevError::NonConvergence {
            terms: 0,
            context: "limit schedule produced fewer than 2 convergent evaluations",
        });
    }

    let mut out = Vec::with_capacity(QUANTITIES.len());
    for q in QUANTITIES {
        let limit = table.get(q);
        let observed: Vec<f64> = reports.iter().map(|(c, pu)| pick(c, pu, q)).collect();
        let (errors, verdict) = match limit {
            Limit::Finite(l) => {
                let errors: Vec<f64> = observed.iter().map(|v| (v - l).abs()).collect();
                let bound = tol * (1.0 + l.abs());
                let last = *errors.last().unwrap();
                // "eventually decreasing": non-increasing over the final
                // steps, with slack for round-off at the noise floor
                let slack = 1e-12 * (1.0 + l.abs());
                let tail = errors.len().saturating_sub(3);
                let decreasing = errors[tail..]
                    .windows(2)
                    .all(|w| w[1] <= w[0] + slack)
                    || last <= 0.01 * bound;
                let verdict = if last <= bound && decreasing {
                    Verdict::Converged
                } else {
                    Verdict::Failed
                };
                (errors, verdict)
            }
            Limit::PosInf | Limit::NegInf => {
                let errors: Vec<f64> = observed.iter().map(|v| 1.0 / v.abs()).collect();
                // monotone growth in magnitude with the correct sign; a
                // fixed "10x previous step" rule would tie the criterion to
                // the schedule ratio, so plain monotonicity is used instead
                let growing = observed.windows(2).all(|w| w[1].abs() > w[0].abs());
                let sign_ok = match limit {
                    Limit::PosInf => *observed.last().unwrap() > 0.0,
                    _ => *observed.last().unwrap() < 0.0,
                };
                let verdict = if growing && sign_ok {
                    Verdict::DivergedAsExpected
                } else {
                    Verdict::Failed
                };
                (errors, verdict)
            }
        };
        out.push(ConvergenceReport {
            case,
            quantity: q,
            limit,
            schedule: used.clone(),
            observed,
            errors,
            verdict,
        });
    }
    Ok(out)
}

/// Convenience: run `verify_case` with the default schedule.
pub fn verify_case_default(
    case: LimitCase,
    p: &CevParams<f64>,
    tol: f64,
) -> Result<Vec<ConvergenceReport>> {
    verify_case(case, p, &default_schedule(case, p), tol)
}
