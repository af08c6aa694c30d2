//! Risk-neutral terminal density of the spot, obtained from the second
//! strike derivative of the call price. The continuous part integrates to
//! less than one whenever the origin is attainable; the defect is the
//! probability mass absorbed at zero.

use crate::error::Result;
use crate::model::{transform, CevParams};
use crate::real::Real;
use crate::specfun::{nc_chi2_pdf, nc_chi2_sf, NcChi2Query, SeriesControl};
use serde::Serialize;

fn pdf<R: Real>(w: R, df: R, lam: R, _ctl: &SeriesControl) -> Result<R> {
    nc_chi2_pdf(&NcChi2Query {
        w,
        df,
        noncentrality: lam,
    })
}

/// First strike derivative of the call price. Test support for the
/// density formula below.
#[allow(dead_code)]
pub(crate) fn dc_dk<R: Real>(p: &CevParams<R>, ctl: &SeriesControl) -> Result<R> {
    let tv = transform(p)?;
    let two = R::c(2.0);
    let two_m_beta = R::c(2.0 - p.beta.as_f64());
    let disc = p.discount();
    let q2 = nc_chi2_sf(
        &NcChi2Query {
            w: two * tv.x,
            df: two * tv.v,
            noncentrality: two * tv.y,
        },
        ctl,
    )?;
    let p_a = pdf(two * tv.y, two + two * tv.v, two * tv.x, ctl)?;
    let q_k = pdf(two * tv.x, two + two * tv.v, two * tv.y, ctl)?;
    let dy = two_m_beta * tv.y / p.strike; // dy/dK
    Ok(-two * p.spot * p_a * dy - disc * (R::one() - q2) + two * p.strike * disc * q_k * dy)
}

/// Second strike derivative of the call price:
///
/// ```text
/// d2C/dK2 = (2 S (2-b)^2 y / K^2) [ (y - 1 + v) p(2y; 2+2v, 2x) - y p(2y; 2v, 2x) ]
///         + e^{-r tau} (2 (2-b)^2 y / K) [ (1 + v - y) p(2x; 2+2v, 2y) + y p(2x; 4+2v, 2y) ]
/// ```
pub(crate) fn d2c_dk2<R: Real>(p: &CevParams<R>, ctl: &SeriesControl) -> Result<R> {
    let tv = transform(p)?;
    let one = R::one();
    let two = R::c(2.0);
    let four = R::c(4.0);
    let two_m_beta = R::c(2.0 - p.beta.as_f64());
    let c2 = two_m_beta * two_m_beta;
    let (v, x, y) = (tv.v, tv.x, tv.y);

    let p1 = pdf(two * y, two + two * v, two * x, ctl)?;
    let p0 = pdf(two * y, two * v, two * x, ctl)?;
    let q1 = pdf(two * x, two + two * v, two * y, ctl)?;
    let q2 = pdf(two * x, four + two * v, two * y, ctl)?;

    let spot_part = two * p.spot * c2 * y / (p.strike * p.strike)
        * ((y - one + v) * p1 - y * p0);
    let strike_part = p.discount() * two * c2 * y / p.strike * ((one + v - y) * q1 + y * q2);
    Ok(spot_part + strike_part)
}

/// Continuous part of the risk-neutral density of the terminal spot,
/// evaluated at `s_t`: `phi(s_t) = e^{r tau} d2C/dK2 |_{K = s_t}`.
/// Tiny negative round-off (above `-1e-12`) is clamped to zero.
pub fn rn_density_with<R: Real>(p: &CevParams<R>, s_t: R, ctl: &SeriesControl) -> Result<R> {
    let mut at = *p;
    at.strike = s_t;
    at.validate()?;
    let phi = d2c_dk2(&at, ctl)? / p.discount();
    if phi < R::zero() {
        debug_assert!(phi > R::c(-1e-12), "density round-off too large: {phi}");
        Ok(R::zero())
    } else {
        Ok(phi)
    }
}

pub fn rn_density<R: Real>(p: &CevParams<R>, s_t: R) -> Result<R> {
    rn_density_with(p, s_t, &SeriesControl::default())
}

/// One sample of the density curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityPoint<R> {
    pub s_t: R,
    pub phi: R,
}

/// Density sampled on a log-spaced grid, with the trapezoid estimate of the
/// continuous mass and the implied absorbed-at-zero mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityGrid<R> {
    pub points: Vec<DensityPoint<R>>,
    pub mass: R,
    pub absorbed_mass: R,
}

/// Sample the density at `n >= 2` log-spaced points on `[lo, hi]`.
pub fn density_grid<R: Real>(
    p: &CevParams<R>,
    lo: R,
    hi: R,
    n: usize,
    ctl: &SeriesControl,
) -> Result<DensityGrid<R>> {
    use crate::error::CevError;
    if !(lo > R::zero()) || !(hi > lo) {
        return Err(CevError::domain("grid", "require 0 < lo < hi"));
    }
    if n < 2 {
        return Err(CevError::domain("n", "need at least 2 grid points"));
    }
    let ln_lo = lo.ln();
    let step = (hi.ln() - ln_lo) / R::c((n - 1) as f64);
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let s_t = (ln_lo + step * R::c(i as f64)).exp();
        points.push(DensityPoint {
            s_t,
            phi: rn_density_with(p, s_t, ctl)?,
        });
    }
    let mut mass = R::zero();
    for pair in points.windows(2) {
        mass += (pair[1].s_t - pair[0].s_t) * (pair[0].phi + pair[1].phi) * R::c(0.5);
    }
    let absorbed_mass = (R::one() - mass).max(R::zero());
    Ok(DensityGrid {
        points,
        mass,
        absorbed_mass,
    })
}
