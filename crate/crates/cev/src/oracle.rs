//! Independent numerical references used by tests and the `verify`
//! subcommand: Euler-Maruyama Monte Carlo of the CEV diffusion with an
//! absorbing boundary at zero, central finite differences, a brute-force
//! front-to-back chi-squared series built on third-party gamma functions,
//! adaptive Simpson quadrature, and the lognormal Black-Scholes closed form.

use crate::error::{CevError, Result};
use crate::model::CevParams;
use crate::pricing::OptionKind;
use crate::specfun::NcChi2Query;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Euler scheme configuration. `drift` is the simulated drift (risk-neutral
/// pricing sets it to the rate); discounting always uses the rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeConfig {
    pub drift: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub scheme: Scheme,
    /// Antithetic pairing, on by default.
    pub antithetic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    EulerAbsorbing,
}

impl SdeConfig {
    pub fn risk_neutral(p: &CevParams<f64>, n_paths: usize, n_steps: usize, seed: u64) -> Self {
        SdeConfig {
            drift: p.rate,
            n_paths,
            n_steps,
            seed,
            scheme: Scheme::EulerAbsorbing,
            antithetic: true,
        }
    }
}

/// Monte Carlo estimate with its standard error and the fraction of paths
/// absorbed at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub absorbed_fraction: f64,
}

// S^e for e in {0.25, 0.5, 0.75} dominates the step cost; resolve the
// exponent once outside the path loop.
#[derive(Clone, Copy)]
enum HalfBetaPow {
    Sqrt,
    SqrtSqrt,
    ThreeQuarters,
    General(f64),
}

impl HalfBetaPow {
    fn new(half_beta: f64) -> Self {
        if (half_beta - 0.5).abs() < 1e-14 {
            HalfBetaPow::Sqrt
        } else if (half_beta - 0.25).abs() < 1e-14 {
            HalfBetaPow::SqrtSqrt
        } else if (half_beta - 0.75).abs() < 1e-14 {
            HalfBetaPow::ThreeQuarters
        } else {
            HalfBetaPow::General(half_beta)
        }
    }

    #[inline(always)]
    fn apply(self, s: f64) -> f64 {
        match self {
            HalfBetaPow::Sqrt => s.sqrt(),
            HalfBetaPow::SqrtSqrt => s.sqrt().sqrt(),
            HalfBetaPow::ThreeQuarters => {
                let r = s.sqrt();
                r * r.sqrt()
            }
            HalfBetaPow::General(e) => s.powf(e),
        }
    }
}

/// Discounted European payoff by Euler-Maruyama simulation of
/// `dS = drift S dt + delta S^{beta/2} dW`, with the path clamped to zero and
/// frozen on the first non-positive crossing. Bit-reproducible for a fixed
/// seed and configuration.
pub fn mc_price(p: &CevParams<f64>, kind: OptionKind, cfg: &SdeConfig) -> Result<McEstimate> {
    p.validate()?;
    if cfg.n_paths == 0 || cfg.n_steps == 0 {
        return Err(CevError::domain("n_paths", "n_paths and n_steps must be >= 1"));
    }
    let dt = p.tau / cfg.n_steps as f64;
    let sq_dt = dt.sqrt();
    let pow = HalfBetaPow::new(p.beta / 2.0);
    let disc = (-p.rate * p.tau).exp();
    let payoff = |s: f64| match kind {
        OptionKind::Call => (s - p.strike).max(0.0),
        OptionKind::Put => (p.strike - s).max(0.0),
    };

    let n_units = if cfg.antithetic {
        cfg.n_paths.div_ceil(2)
    } else {
        cfg.n_paths
    };

    // one unit = one antithetic pair (or a single path); each unit owns an
    // independent ChaCha stream so the reduction order is deterministic
    let results: Vec<(f64, u32)> = (0..n_units)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let mut s_a = p.spot;
            let mut s_b = p.spot;
            let mut live_a = true;
            let mut live_b = cfg.antithetic;
            for _ in 0..cfg.n_steps {
                if !live_a && !live_b {
                    break;
                }
                let z: f64 = rng.sample(StandardNormal);
                if live_a {
                    s_a += cfg.drift * s_a * dt + p.delta_vol * pow.apply(s_a) * sq_dt * z;
                    if s_a <= 0.0 {
                        s_a = 0.0;
                        live_a = false;
                    }
                }
                if live_b {
                    s_b += cfg.drift * s_b * dt - p.delta_vol * pow.apply(s_b) * sq_dt * z;
                    if s_b <= 0.0 {
                        s_b = 0.0;
                        live_b = false;
                    }
                }
            }
            if cfg.antithetic {
                let absorbed = (!live_a as u32) + (!live_b as u32);
                (0.5 * (payoff(s_a) + payoff(s_b)), absorbed)
            } else {
                (payoff(s_a), !live_a as u32)
            }
        })
        .collect();

    // sequential, fixed-order reduction for reproducibility
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    let mut absorbed = 0u64;
    for (i, &(v, abs_count)) in results.iter().enumerate() {
        let n = (i + 1) as f64;
        let delta = v - mean;
        mean += delta / n;
        m2 += delta * (v - mean);
        absorbed += abs_count as u64;
    }
    let n = n_units as f64;
    let var = if n_units > 1 { m2 / (n - 1.0) } else { 0.0 };
    let total_paths = if cfg.antithetic { 2 * n_units } else { n_units };
    Ok(McEstimate {
        mean: disc * mean,
        std_error: disc * (var / n).sqrt(),
        absorbed_fraction: absorbed as f64 / total_paths as f64,
    })
}

/// Central finite difference of order 1 or 2.
pub fn fd_derivative<F>(mut f: F, x0: f64, h: f64, order: u8) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(h > 0.0) {
        return Err(CevError::domain("h", "must be > 0"));
    }
    match order {
        1 => Ok((f(x0 + h)? - f(x0 - h)?) / (2.0 * h)),
        2 => Ok((f(x0 + h)? - 2.0 * f(x0)? + f(x0 - h)?) / (h * h)),
        _ => Err(CevError::domain("order", "must be 1 or 2")),
    }
}

/// Plain front-to-back summation of exactly `n_terms` terms of the series
/// `sum_n g(n, x) G(n + v - 1, y)`, with each factor computed independently
/// from third-party gamma functions and Kahan-compensated accumulation.
/// Test support only.
pub fn nc_chi2_sf_bruteforce(q: &NcChi2Query<f64>, n_terms: usize) -> f64 {
    use statrs::function::gamma::{checked_gamma_ur, ln_gamma};
    assert!(q.df > 0.0 && q.w >= 0.0 && q.noncentrality >= 0.0);
    if q.w == 0.0 {
        return 1.0;
    }
    let x = q.noncentrality / 2.0;
    let y = q.w / 2.0;
    let v = q.df / 2.0;
    let upper = |a: f64, z: f64| -> f64 {
        if z == 0.0 {
            1.0
        } else {
            checked_gamma_ur(a, z).expect("gamma_ur domain")
        }
    };
    if x == 0.0 {
        return upper(v, y);
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for n in 1..=n_terms {
        let nf = n as f64;
        let ln_g = -x + (nf - 1.0) * x.ln() - ln_gamma(nf);
        let term = if ln_g < -745.0 {
            0.0
        } else {
            ln_g.exp() * upper(nf + v - 1.0, y)
        };
        // Kahan step
        let t = term - comp;
        let s = sum + t;
        comp = (s - sum) - t;
        sum = s;
    }
    sum.clamp(0.0, 1.0)
}

/// Textbook lognormal Black-Scholes call price; reference for the
/// `beta -> 2` continuity check.
pub fn bs_reference(spot: f64, strike: f64, rate: f64, vol: f64, tau: f64) -> f64 {
    if tau == 0.0 || vol <= 0.0 {
        return (spot - strike * (-rate * tau).exp()).max(0.0);
    }
    let sq = vol * tau.sqrt();
    let d1 = ((spot / strike).ln() + (rate + 0.5 * vol * vol) * tau) / sq;
    let d2 = d1 - sq;
    let n = statrs::distribution::Normal::new(0.0, 1.0).unwrap();
    use statrs::distribution::ContinuousCDF;
    spot * n.cdf(d1) - strike * (-rate * tau).exp() * n.cdf(d2)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F>(f: &mut F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F>(
        f: &mut F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm)?;
        let frm = f(rm)?;
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1)?)
    }
    let m = 0.5 * (a + b);
    let fa = f(a)?;
    let fm = f(m)?;
    let fb = f(b)?;
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}
