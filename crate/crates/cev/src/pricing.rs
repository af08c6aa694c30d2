//! Closed-form European call and put prices under CEV:
//!
//! `C = S Q(2y; 2+2v, 2x) - K e^{-r tau} (1 - Q(2x; 2v, 2y))`
//! `P = K e^{-r tau} Q(2x; 2v, 2y) - S (1 - Q(2y; 2+2v, 2x))`

use crate::error::Result;
use crate::model::{transform, CevParams};
use crate::real::Real;
use crate::specfun::{nc_chi2_sf, NcChi2Query, SeriesControl};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

/// The two survival-function values shared by the call and put formulas.
pub(crate) struct PriceInputs<R: Real> {
    /// Q(2y; 2+2v, 2x)
    pub q1: R,
    /// Q(2x; 2v, 2y)
    pub q2: R,
}

pub(crate) fn price_inputs<R: Real>(p: &CevParams<R>, ctl: &SeriesControl) -> Result<PriceInputs<R>> {
    let tv = transform(p)?;
    let two = R::c(2.0);
    let q1 = nc_chi2_sf(
        &NcChi2Query {
            w: two * tv.y,
            df: two + two * tv.v,
            noncentrality: two * tv.x,
        },
        ctl,
    )?;
    let q2 = nc_chi2_sf(
        &NcChi2Query {
            w: two * tv.x,
            df: two * tv.v,
            noncentrality: two * tv.y,
        },
        ctl,
    )?;
    Ok(PriceInputs { q1, q2 })
}

/// Assemble a price from the shared survival values, projected into the
/// no-arbitrage band the true price always satisfies. The series carries
/// ~1e-12 of relative round-off, so the subtractive assembly can land just
/// outside the band (e.g. a slightly negative deep out-of-the-money call);
/// the projection only acts when the raw value is provably wrong.
pub(crate) fn price_from_q<R: Real>(
    p: &CevParams<R>,
    inputs: &PriceInputs<R>,
    kind: OptionKind,
) -> R {
    let disc_k = p.strike * p.discount();
    let raw = match kind {
        OptionKind::Call => p.spot * inputs.q1 - disc_k * (R::one() - inputs.q2),
        OptionKind::Put => disc_k * inputs.q2 - p.spot * (R::one() - inputs.q1),
    };
    let (lo, hi) = match kind {
        OptionKind::Call => ((p.spot - disc_k).max(R::zero()), p.spot),
        OptionKind::Put => ((disc_k - p.spot).max(R::zero()), disc_k),
    };
    raw.max(lo).min(hi)
}

fn intrinsic<R: Real>(p: &CevParams<R>, kind: OptionKind) -> R {
    match kind {
        OptionKind::Call => (p.spot - p.strike).max(R::zero()),
        OptionKind::Put => (p.strike - p.spot).max(R::zero()),
    }
}

/// Price with an explicit series control.
pub fn price_with<R: Real>(p: &CevParams<R>, kind: OptionKind, ctl: &SeriesControl) -> Result<R> {
    p.validate()?;
    if p.tau == R::zero() {
        return Ok(intrinsic(p, kind));
    }
    let inputs = price_inputs(p, ctl)?;
    Ok(price_from_q(p, &inputs, kind))
}

pub fn price<R: Real>(p: &CevParams<R>, kind: OptionKind) -> Result<R> {
    price_with(p, kind, &SeriesControl::default())
}

pub fn call_price<R: Real>(p: &CevParams<R>) -> Result<R> {
    price(p, OptionKind::Call)
}

pub fn put_price<R: Real>(p: &CevParams<R>) -> Result<R> {
    price(p, OptionKind::Put)
}
