//! Closed-form Greeks under CEV, the Taylor P&L approximation and the
//! pricing-PDE residual `rC - Theta - (delta^2 S^beta / 2) Gamma - r S Delta`.
//!
//! Theta is reported in the calendar-time convention (the derivative with
//! respect to `t`, i.e. minus the derivative with respect to `tau`).

use crate::error::Result;
use crate::model::{transform, CevParams, TransformedVars};
use crate::pricing::{price_from_q, OptionKind, PriceInputs};
use crate::real::Real;
use crate::specfun::{nc_chi2_pdf, nc_chi2_sf, nc_chi2_sf_complement_df, NcChi2Query, SeriesControl};
use serde::{Deserialize, Serialize};

/// Price plus the five first-order sensitivities for one option kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreeksReport<R: Real> {
    pub price: R,
    pub delta: R,
    pub gamma: R,
    pub theta: R,
    pub vega: R,
    pub rho: R,
}

/// All kernel evaluations needed by the price and every Greek, computed once
/// from a single variable transform. The public operations all route through
/// this so that `full_report` and the individual calls are bit-identical.
struct Engine<R: Real> {
    p: CevParams<R>,
    tv: TransformedVars<R>,
    disc_k: R,
    inputs: PriceInputs<R>,
    /// Q(2y; 2-2v, 2x), via the swapped-argument complement
    q_comp: R,
    /// p(2y; 4+2v, 2x)
    p_a: R,
    /// p(2y; 6+2v, 2x)
    p_b: R,
    /// p(2x; 2v, 2y)
    p_c: R,
    /// p(2x; 2+2v, 2y)
    p_d: R,
}

impl<R: Real> Engine<R> {
    fn new(p: &CevParams<R>, ctl: &SeriesControl) -> Result<Self> {
        p.validate()?;
        let tv = transform(p)?;
        let two = R::c(2.0);
        let (x2, y2) = (two * tv.x, two * tv.y);
        let sf = |w: R, df: R, lam: R| {
            nc_chi2_sf(
                &NcChi2Query {
                    w,
                    df,
                    noncentrality: lam,
                },
                ctl,
            )
        };
        let pdf = |w: R, df: R, lam: R| {
            nc_chi2_pdf(&NcChi2Query {
                w,
                df,
                noncentrality: lam,
            })
        };
        let q1 = sf(y2, two + two * tv.v, x2)?;
        let q2 = sf(x2, two * tv.v, y2)?;
        let q_comp = nc_chi2_sf_complement_df(y2, two - two * tv.v, x2, ctl)?;
        Ok(Engine {
            p: *p,
            tv,
            disc_k: p.strike * p.discount(),
            inputs: PriceInputs { q1, q2 },
            q_comp,
            p_a: pdf(y2, R::c(4.0) + two * tv.v, x2)?,
            p_b: pdf(y2, R::c(6.0) + two * tv.v, x2)?,
            p_c: pdf(x2, two * tv.v, y2)?,
            p_d: pdf(x2, two + two * tv.v, y2)?,
        })
    }

    fn gap(&self) -> R {
        R::c(2.0) - self.p.beta
    }

    /// S p(2y; 4+2v, 2x) - K e^{-r tau} p(2x; 2v, 2y), the bracket shared by
    /// theta, vega and rho.
    fn spread(&self) -> R {
        self.p.spot * self.p_a - self.disc_k * self.p_c
    }

    fn price(&self, kind: OptionKind) -> R {
        price_from_q(&self.p, &self.inputs, kind)
    }

    fn delta(&self, kind: OptionKind) -> R {
        let two = R::c(2.0);
        let coef = two * self.tv.x * self.gap();
        let call = self.inputs.q1 + coef * self.p_a - coef / self.p.spot * self.disc_k * self.p_c;
        match kind {
            OptionKind::Call => call,
            OptionKind::Put => call - R::one(),
        }
    }

    fn gamma(&self) -> R {
        let two = R::c(2.0);
        let s = self.p.spot;
        let (x, y) = (self.tv.x, self.tv.y);
        let g = self.gap();
        let g2 = g * g;
        let three = R::c(3.0);
        two * x * g2 / s * ((three - self.p.beta) / g - x) * self.p_a
            + two * x * x * g2 / s * self.p_b
            + two * x * x * g2 / (s * s) * self.disc_k * self.p_c
            - two * x * y * g2 / (s * s) * self.disc_k * self.p_d
    }

    fn theta(&self, kind: OptionKind) -> R {
        // 2 r x (2-beta) / (m-1) == x k delta^2 (2-beta)^2, exact from the
        // definition of k and finite at r = 0
        let g = self.gap();
        let d2 = self.p.delta_vol * self.p.delta_vol;
        let common = self.tv.x * self.tv.k * d2 * g * g * self.spread();
        let kr_disc = self.p.strike * self.p.rate * self.p.discount();
        match kind {
            OptionKind::Call => -kr_disc * self.q_comp + common,
            OptionKind::Put => kr_disc * self.inputs.q2 + common,
        }
    }

    fn vega(&self) -> R {
        -R::c(4.0) * self.tv.x / self.p.sigma0() * self.spread()
    }

    fn rho(&self, kind: OptionKind) -> R {
        let g = self.gap();
        let a = g * self.p.tau;
        let r = self.p.rate;
        // 1/r - (2-beta) tau / (m-1): removable singularity at r = 0,
        // expanded as a/2 - a^2 r/12 + a^4 r^3/720 for small |a r|
        let factor = if (a * r).abs() < R::c(1e-2) {
            let a2 = a * a;
            let r2 = r * r;
            a * R::c(0.5) - a2 * r / R::c(12.0) + a2 * a2 * r2 * r / R::c(720.0)
                - a2 * a2 * a2 * r2 * r2 * r / R::c(30240.0)
        } else {
            R::one() / r - a / (self.tv.m - R::one())
        };
        let second = R::c(2.0) * self.tv.x * factor * self.spread();
        let kt_disc = self.p.strike * self.p.tau * self.p.discount();
        match kind {
            OptionKind::Call => kt_disc * (R::one() - self.inputs.q2) + second,
            OptionKind::Put => -kt_disc * self.inputs.q2 + second,
        }
    }
}

pub fn delta_with<R: Real>(p: &CevParams<R>, kind: OptionKind, ctl: &SeriesControl) -> Result<R> {
    Ok(Engine::new(p, ctl)?.delta(kind))
}

pub fn delta<R: Real>(p: &CevParams<R>, kind: OptionKind) -> Result<R> {
    delta_with(p, kind, &SeriesControl::default())
}

pub fn gamma_with<R: Real>(p: &CevParams<R>, ctl: &SeriesControl) -> Result<R> {
    Ok(Engine::new(p, ctl)?.gamma())
}

/// Gamma is identical for the call and the put.
pub fn gamma<R: Real>(p: &CevParams<R>) -> Result<R> {
    gamma_with(p, &SeriesControl::default())
}

pub fn theta_with<R: Real>(p: &CevParams<R>, kind: OptionKind, ctl: &SeriesControl) -> Result<R> {
    Ok(Engine::new(p, ctl)?.theta(kind))
}

pub fn theta<R: Real>(p: &CevParams<R>, kind: OptionKind) -> Result<R> {
    theta_with(p, kind, &SeriesControl::default())
}

pub fn vega_with<R: Real>(p: &CevParams<R>, ctl: &SeriesControl) -> Result<R> {
    Ok(Engine::new(p, ctl)?.vega())
}

/// Vega with respect to `sigma0`; identical for the call and the put.
pub fn vega<R: Real>(p: &CevParams<R>) -> Result<R> {
    vega_with(p, &SeriesControl::default())
}

pub fn rho_with<R: Real>(p: &CevParams<R>, kind: OptionKind, ctl: &SeriesControl) -> Result<R> {
    Ok(Engine::new(p, ctl)?.rho(kind))
}

pub fn rho<R: Real>(p: &CevParams<R>, kind: OptionKind) -> Result<R> {
    rho_with(p, kind, &SeriesControl::default())
}

pub fn full_report_with<R: Real>(
    p: &CevParams<R>,
    kind: OptionKind,
    ctl: &SeriesControl,
) -> Result<GreeksReport<R>> {
    let e = Engine::new(p, ctl)?;
    Ok(GreeksReport {
        price: e.price(kind),
        delta: e.delta(kind),
        gamma: e.gamma(),
        theta: e.theta(kind),
        vega: e.vega(),
        rho: e.rho(kind),
    })
}

/// Price and all five Greeks from a single variable transform.
pub fn full_report<R: Real>(p: &CevParams<R>, kind: OptionKind) -> Result<GreeksReport<R>> {
    full_report_with(p, kind, &SeriesControl::default())
}

/// Second-order Taylor P&L: `delta * dS + gamma * dS^2 / 2`.
pub fn taylor_pnl<R: Real>(report: &GreeksReport<R>, ds: R) -> R {
    report.delta * ds + R::c(0.5) * report.gamma * ds * ds
}

/// Residual of the pricing PDE `r V = Theta + (delta^2 S^beta / 2) Gamma + r S Delta`;
/// near zero when price and Greeks are mutually consistent.
pub fn pde_residual<R: Real>(p: &CevParams<R>, kind: OptionKind) -> Result<R> {
    let rep = full_report(p, kind)?;
    let half_var = R::c(0.5) * p.delta_vol * p.delta_vol * p.spot.powf(p.beta);
    Ok(p.rate * rep.price - rep.theta - half_var * rep.gamma - p.rate * p.spot * rep.delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::pricing::call_price;

    fn std_params() -> CevParams<f64> {
        CevParams::new(100.0, 100.0, 0.05, 2.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn put_delta_is_call_minus_one() {
        let p = std_params();
        let dc = delta(&p, OptionKind::Call).unwrap();
        let dp = delta(&p, OptionKind::Put).unwrap();
        assert_eq!(dp, dc - 1.0);
    }

    #[test]
    fn delta_matches_finite_difference() {
        let p = std_params();
        let d = delta(&p, OptionKind::Call).unwrap();
        let h = 1e-4 * p.spot;
        let fd = oracle::fd_derivative(
            |s| {
                let mut q = p;
                q.spot = s;
                call_price(&q)
            },
            p.spot,
            h,
            1,
        )
        .unwrap();
        assert!((d / fd - 1.0).abs() < 1e-5, "{d} vs {fd}");
    }

    #[test]
    fn gamma_matches_finite_difference() {
        let p = std_params();
        let g = gamma(&p).unwrap();
        let h = 1e-3 * p.spot;
        let fd = oracle::fd_derivative(
            |s| {
                let mut q = p;
                q.spot = s;
                call_price(&q)
            },
            p.spot,
            h,
            2,
        )
        .unwrap();
        assert!((g / fd - 1.0).abs() < 1e-4, "{g} vs {fd}");
    }

    #[test]
    fn theta_matches_finite_difference() {
        let p = std_params();
        let t = theta(&p, OptionKind::Call).unwrap();
        let fd = oracle::fd_derivative(
            |tau| {
                let mut q = p;
                q.tau = tau;
                call_price(&q)
            },
            p.tau,
            1e-5,
            1,
        )
        .unwrap();
        assert!((t / -fd - 1.0).abs() < 1e-4, "{t} vs {}", -fd);
    }

    #[test]
    fn theta_parity_gap() {
        // Theta_P - Theta_C = r K e^{-r tau}
        for &(s, b) in &[(100.0f64, 1.0f64), (80.0, 0.5), (130.0, 1.6)] {
            let mut p = std_params();
            p.spot = s;
            p.beta = b;
            p.delta_vol = 0.3 * s.powf(1.0 - b / 2.0);
            let tc = theta(&p, OptionKind::Call).unwrap();
            let tp = theta(&p, OptionKind::Put).unwrap();
            let expect = p.rate * p.strike * (-p.rate * p.tau).exp();
            assert!(((tp - tc) / expect - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn vega_matches_finite_difference_in_sigma0() {
        // perturb delta_vol as d delta = d sigma * S^{1 - beta/2}
        for &b in &[0.5f64, 1.0, 1.5] {
            let mut p = std_params();
            p.beta = b;
            p.delta_vol = 0.2 * p.spot.powf(1.0 - b / 2.0);
            let v = vega(&p).unwrap();
            let h = 1e-5;
            let scale = p.spot.powf(1.0 - b / 2.0);
            let fd = oracle::fd_derivative(
                |sig| {
                    let mut q = p;
                    q.delta_vol = p.delta_vol + (sig - p.sigma0()) * scale;
                    call_price(&q)
                },
                p.sigma0(),
                h,
                1,
            )
            .unwrap();
            assert!((v / fd - 1.0).abs() < 1e-4, "beta={b}: {v} vs {fd}");
        }
    }

    #[test]
    fn rho_matches_finite_difference() {
        let p = std_params();
        let r = rho(&p, OptionKind::Call).unwrap();
        let fd = oracle::fd_derivative(
            |rate| {
                let mut q = p;
                q.rate = rate;
                call_price(&q)
            },
            p.rate,
            1e-6,
            1,
        )
        .unwrap();
        assert!((r / fd - 1.0).abs() < 1e-4, "{r} vs {fd}");
    }

    #[test]
    fn rho_parity_gap_and_zero_rate_branch() {
        let p = std_params();
        let rc = rho(&p, OptionKind::Call).unwrap();
        let rp = rho(&p, OptionKind::Put).unwrap();
        let expect = p.strike * p.tau * (-p.rate * p.tau).exp();
        assert!(((rc - rp) / expect - 1.0).abs() < 1e-10);

        // removable singularity at r = 0: closed form vs finite difference
        let mut p0 = p;
        p0.rate = 0.0;
        let r0 = rho(&p0, OptionKind::Call).unwrap();
        let fd = oracle::fd_derivative(
            |rate| {
                let mut q = p0;
                q.rate = rate;
                call_price(&q)
            },
            0.0,
            1e-6,
            1,
        )
        .unwrap();
        assert!((r0 / fd - 1.0).abs() < 1e-4, "{r0} vs {fd}");
        // continuity across the series threshold
        let mut p_eps = p;
        p_eps.rate = 1e-6;
        let r_eps = rho(&p_eps, OptionKind::Call).unwrap();
        assert!((r_eps / r0 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn report_fields_match_individual_ops_bitwise() {
        let p = std_params();
        for kind in [OptionKind::Call, OptionKind::Put] {
            let rep = full_report(&p, kind).unwrap();
            assert_eq!(rep.price, crate::pricing::price(&p, kind).unwrap());
            assert_eq!(rep.delta, delta(&p, kind).unwrap());
            assert_eq!(rep.gamma, gamma(&p).unwrap());
            assert_eq!(rep.theta, theta(&p, kind).unwrap());
            assert_eq!(rep.vega, vega(&p).unwrap());
            assert_eq!(rep.rho, rho(&p, kind).unwrap());
        }
        let call = full_report(&p, OptionKind::Call).unwrap();
        let put = full_report(&p, OptionKind::Put).unwrap();
        assert_eq!(put.delta, call.delta - 1.0);
        assert_eq!(put.gamma, call.gamma);
        assert_eq!(put.vega, call.vega);
    }

    #[test]
    fn taylor_pnl_basics() {
        let p = std_params();
        let rep = full_report(&p, OptionKind::Call).unwrap();
        assert_eq!(taylor_pnl(&rep, 0.0), 0.0);
        assert!(taylor_pnl(&rep, 0.5) > 0.0);
        // error is O(h^3): the ratio between h = 1 and h = 0.1 is ~1000
        let err = |h: f64| {
            let mut q = p;
            q.spot += h;
            let truth = call_price(&q).unwrap() - rep.price;
            (taylor_pnl(&rep, h) - truth).abs()
        };
        let ratio = err(1.0) / err(0.1);
        assert!(ratio > 300.0 && ratio < 3000.0, "ratio={ratio}");
    }

    #[test]
    fn pde_residual_small() {
        let p = std_params();
        for kind in [OptionKind::Call, OptionKind::Put] {
            let res = pde_residual(&p, kind).unwrap();
            assert!(res.abs() <= 1e-7 * p.spot, "{kind:?}: {res}");
        }
    }

    #[test]
    fn sigma_to_infinity_regime() {
        // unit spot/strike so the x*K/sigma0 scale of the residual vega
        // sits far below the threshold at delta = 1e3
        let mut p = CevParams::<f64>::new(1.0, 1.0, 0.05, 1e3, 1.0, 1.0).unwrap();
        p.delta_vol = 1e3;
        assert!(gamma(&p).unwrap().abs() < 1e-8);
        assert!(vega(&p).unwrap().abs() < 1e-8);
        let rp = rho(&p, OptionKind::Put).unwrap();
        let expect = -p.strike * p.tau * (-p.rate * p.tau).exp();
        assert!((rp / expect - 1.0).abs() < 1e-4);
        assert!(pde_residual(&p, OptionKind::Call).unwrap().abs() < 1e-6 * p.spot);
    }
}
