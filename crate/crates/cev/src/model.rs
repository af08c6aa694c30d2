//! CEV model parameters and the variable transforms shared by all pricing
//! formulas:
//!
//! `v = 1/(2-beta)`, `m = exp(r (2-beta) tau)`,
//! `k = 2r / (delta^2 (2-beta) (m-1))`, `x = m k S^(2-beta)`, `y = k K^(2-beta)`.

use crate::error::{CevError, Result};
use crate::real::Real;
use serde::{Deserialize, Serialize};

/// Market and contract inputs.
///
/// `delta_vol` is the CEV volatility scale (units `currency^{1-beta/2} year^{-1/2}`);
/// the local volatility at the valuation spot is `sigma0 = delta_vol * spot^{beta/2-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CevParams<R: Real> {
    pub spot: R,
    pub strike: R,
    pub rate: R,
    pub delta_vol: R,
    pub beta: R,
    pub tau: R,
}

impl<R: Real> CevParams<R> {
    pub fn new(spot: R, strike: R, rate: R, delta_vol: R, beta: R, tau: R) -> Result<Self> {
        let p = CevParams {
            spot,
            strike,
            rate,
            delta_vol,
            beta,
            tau,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spot > R::zero()) {
            return Err(CevError::domain(
                "spot",
                format!("must be > 0, got {}", self.spot),
            ));
        }
        if !(self.strike > R::zero()) {
            return Err(CevError::domain(
                "strike",
                format!("must be > 0, got {}", self.strike),
            ));
        }
        if !self.rate.is_finite() {
            return Err(CevError::domain("rate", "must be finite"));
        }
        if !(self.delta_vol > R::zero()) {
            return Err(CevError::domain(
                "delta_vol",
                format!("must be > 0, got {}", self.delta_vol),
            ));
        }
        if !(self.beta > R::zero() && self.beta < R::c(2.0)) {
            return Err(CevError::domain(
                "beta",
                format!(
                    "must lie in the open interval (0, 2); beta = 2 is the \
                     lognormal Black-Scholes boundary and beta = 0 the absolute \
                     diffusion, both outside the chi-squared representation; got {}",
                    self.beta
                ),
            ));
        }
        if !(self.tau >= R::zero()) {
            return Err(CevError::domain(
                "tau",
                format!("must be >= 0, got {}", self.tau),
            ));
        }
        Ok(())
    }

    /// Local volatility at the valuation spot, `delta * S^(beta/2 - 1)`.
    pub fn sigma0(&self) -> R {
        self.delta_vol * self.spot.powf(self.beta * R::c(0.5) - R::one())
    }

    /// Discount factor `e^{-r tau}`.
    pub fn discount(&self) -> R {
        (-self.rate * self.tau).exp()
    }
}

/// The transformed quantities `v, m, k, x, y` derived from [`CevParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedVars<R: Real> {
    pub v: R,
    pub m: R,
    pub k: R,
    pub x: R,
    pub y: R,
}

/// Compute the transformed variables; `tau` must be strictly positive
/// (`k` diverges at `tau = 0`, pricing handles expiry separately).
///
/// `|r (2-beta) tau| < 1e-8` takes the removable-singularity limit
/// `k = 2 / (delta^2 (2-beta)^2 tau)`.
pub fn transform<R: Real>(p: &CevParams<R>) -> Result<TransformedVars<R>> {
    p.validate()?;
    if !(p.tau > R::zero()) {
        return Err(CevError::domain(
            "tau",
            format!("transform requires tau > 0, got {}", p.tau),
        ));
    }
    let two = R::c(2.0);
    let gap = two - p.beta;
    let v = R::one() / gap;
    let exponent = p.rate * gap * p.tau;
    let m = exponent.exp();
    let d2 = p.delta_vol * p.delta_vol;
    let k = if exponent.abs() < R::c(1e-8) {
        two / (d2 * gap * gap * p.tau)
    } else {
        two * p.rate / (d2 * gap * (m - R::one()))
    };
    let x = m * k * p.spot.powf(gap);
    let y = k * p.strike.powf(gap);
    Ok(TransformedVars { v, m, k, x, y })
}

/// Local volatility `delta * S^(beta/2 - 1)` (free-function form).
pub fn sigma0<R: Real>(p: &CevParams<R>) -> R {
    p.sigma0()
}
