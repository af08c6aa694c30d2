//! Special-function kernel: log-gamma, the regularized upper incomplete
//! gamma function, exponentially scaled modified Bessel functions of the
//! first kind, and the complementary non-central chi-squared distribution
//! and density that every CEV pricing formula is built from.
//!
//! The survival function is evaluated as the series
//! `Q(w; df, lambda) = sum_{n>=1} g(n, x) G(n + v - 1, y)` with
//! `x = lambda/2`, `y = w/2`, `v = df/2` and `g(n, x) = e^{-x} x^{n-1} / Gamma(n)`,
//! summed outward from the dominant Poisson weight so that large
//! non-centralities do not underflow the early terms.

use crate::error::{CevError, Result};
use crate::real::Real;
use std::sync::OnceLock;

/// Argument triple for the non-central chi-squared kernel.
///
/// `w` is the distribution argument, `df` the degrees of freedom and
/// `noncentrality` the non-central parameter. Direct series evaluation
/// requires `df > 0`; non-positive `df` is only reachable through
/// [`nc_chi2_sf_complement_df`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcChi2Query<R: Real> {
    pub w: R,
    pub df: R,
    pub noncentrality: R,
}

impl<R: Real> NcChi2Query<R> {
    pub fn new(w: R, df: R, noncentrality: R) -> Result<Self> {
        if !(w >= R::zero()) {
            return Err(CevError::domain("w", format!("must be >= 0, got {w}")));
        }
        if !(noncentrality >= R::zero()) {
            return Err(CevError::domain(
                "noncentrality",
                format!("must be >= 0, got {noncentrality}"),
            ));
        }
        Ok(Self {
            w,
            df,
            noncentrality,
        })
    }
}

/// Convergence controls for the chi-squared series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Relative tail tolerance for terminating each summation direction.
    pub rel_tol: f64,
    /// Hard budget on the total number of terms.
    pub max_terms: usize,
    /// Terms whose log-magnitude falls below this are treated as zero.
    pub log_space_threshold: f64,
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(CevError::domain("rel_tol", "must be > 0"));
        }
        if self.max_terms < 1 {
            return Err(CevError::domain("max_terms", "must be >= 1"));
        }
        Ok(())
    }
}

fn default_rel_tol() -> f64 {
    static TOL: OnceLock<f64> = OnceLock::new();
    *TOL.get_or_init(|| {
        std::env::var("CEV_SERIES_TOL")
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|t| *t > 0.0)
            .unwrap_or(1e-13)
    })
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            rel_tol: default_rel_tol(),
            max_terms: 1_000_000,
            log_space_threshold: -745.0,
        }
    }
}

// Lanczos approximation, g = 607/128, 15 coefficients (Godfrey's set).
const LANCZOS_G: f64 = 4.7421875;
const LANCZOS_COEF: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
];
const LN_SQRT_2PI: f64 = 0.91893853320467274178032973640562;

/// Natural log of the gamma function for `a > 0`.
pub fn ln_gamma<R: Real>(a: R) -> Result<R> {
    if !(a > R::zero()) {
        return Err(CevError::domain("a", format!("must be > 0, got {a}")));
    }
    Ok(ln_gamma_unchecked(a))
}

fn ln_gamma_unchecked<R: Real>(a: R) -> R {
    let half = R::c(0.5);
    if a < half {
        // reflection: ln G(a) = ln(pi / sin(pi a)) - ln G(1 - a)
        let pi = R::c(std::f64::consts::PI);
        return (pi / (pi * a).sin()).ln() - ln_gamma_unchecked(R::one() - a);
    }
    let mut ser = R::c(LANCZOS_COEF[0]);
    for (k, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        ser += R::c(c) / (a - R::one() + R::c(k as f64));
    }
    let t = a + R::c(LANCZOS_G) - half;
    (a - half) * t.ln() - t + R::c(LN_SQRT_2PI) + ser.ln()
}

// Stirling-series error: stirlerr(k) = ln Gamma(k+1) - (k+1/2) ln k + k
// - ln sqrt(2 pi). Direct evaluation for small k, asymptotic series above.
fn stirlerr<R: Real>(k: R) -> R {
    if k < R::c(16.0) {
        return ln_gamma_unchecked(k + R::one()) - (k + R::c(0.5)) * k.ln() + k
            - R::c(LN_SQRT_2PI);
    }
    let k2 = k * k;
    // 1/(12k) - 1/(360k^3) + 1/(1260k^5) - 1/(1680k^7) + 1/(1188k^9)
    (R::c(1.0 / 12.0)
        - (R::c(1.0 / 360.0)
            - (R::c(1.0 / 1260.0) - (R::c(1.0 / 1680.0) - R::c(1.0 / 1188.0) / k2) / k2) / k2)
            / k2)
        / k
}

// Deviance term bd0(k, lam) = k ln(k/lam) + lam - k, evaluated without the
// catastrophic cancellation of the naive form when k ~ lam (C. Loader's
// algorithm, as used by R's dpois).
fn bd0<R: Real>(k: R, lam: R) -> R {
    let diff = k - lam;
    if diff.abs() <= R::c(0.1) * (k + lam) {
        let v = diff / (k + lam);
        let v2 = v * v;
        let mut s = diff * v;
        let mut ej = R::c(2.0) * k * v;
        let mut j = 1u32;
        loop {
            ej *= v2;
            let s1 = s + ej / R::c((2 * j + 1) as f64);
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1;
        }
    }
    k * (k / lam).ln() + lam - k
}

// ln of the Poisson(lam) mass at k (real k >= 0): computing it as
// -stirlerr(k) - bd0(k, lam) - ln sqrt(2 pi k) keeps the absolute log error
// at machine epsilon even when k and lam are ~1e8, where the naive
// k ln lam - lam - ln Gamma(k+1) loses eight digits to cancellation.
fn ln_poisson_pmf<R: Real>(k: R, lam: R) -> R {
    if k == R::zero() {
        return -lam;
    }
    -stirlerr(k) - bd0(k, lam) - R::c(0.5) * (R::c(2.0 * std::f64::consts::PI) * k).ln()
}

/// Regularized upper incomplete gamma function
/// `G(a, y) = Gamma(a, y) / Gamma(a)` for `a > 0`, `y >= 0`.
///
/// Lower series for `y < a + 1`, continued fraction otherwise.
pub fn reg_gamma_upper<R: Real>(a: R, y: R) -> Result<R> {
    if !(a > R::zero()) {
        return Err(CevError::domain("a", format!("must be > 0, got {a}")));
    }
    if !(y >= R::zero()) {
        return Err(CevError::domain("y", format!("must be >= 0, got {y}")));
    }
    if y == R::zero() {
        return Ok(R::one());
    }
    // a ln y - y - ln Gamma(a) = ln(a * poisson_pmf(a; y)), cancellation-free
    let ln_pref = a.ln() + ln_poisson_pmf(a, y);
    let eps = R::epsilon();
    if y < a + R::one() {
        // lower series for P(a, y), then complement
        let mut ap = a;
        let mut del = R::one() / a;
        let mut sum = del;
        for _ in 0..1_000_000 {
            ap += R::one();
            del *= y / ap;
            sum += del;
            if del.abs() < sum.abs() * eps {
                let p = sum * ln_pref.exp();
                return Ok((R::one() - p).max(R::zero()).min(R::one()));
            }
        }
        Err(CevError::NonConvergence {
            terms: 1_000_000,
            context: "reg_gamma_upper lower series",
        })
    } else {
        // modified Lentz continued fraction for Q(a, y)
        let fpmin = R::c(1e-300);
        let mut b = y + R::one() - a;
        let mut c = R::one() / fpmin;
        let mut d = R::one() / b;
        let mut h = d;
        for i in 1..1_000_000 {
            let an = -R::c(i as f64) * (R::c(i as f64) - a);
            b += R::c(2.0);
            d = an * d + b;
            if d.abs() < fpmin {
                d = fpmin;
            }
            c = b + an / c;
            if c.abs() < fpmin {
                c = fpmin;
            }
            d = R::one() / d;
            let del = d * c;
            h *= del;
            if (del - R::one()).abs() < eps {
                let q = h * ln_pref.exp();
                return Ok(q.max(R::zero()).min(R::one()));
            }
        }
        Err(CevError::NonConvergence {
            terms: 1_000_000,
            context: "reg_gamma_upper continued fraction",
        })
    }
}

/// Exponentially scaled modified Bessel function `e^{-z} I_order(z)`
/// for `order > -1`, `z >= 0`. Finite for all `z`; behaves as
/// `1/sqrt(2 pi z)` for large `z` and as `(z/2)^order e^{-z} / Gamma(order+1)`
/// for small `z`.
pub fn bessel_i_scaled<R: Real>(order: R, z: R) -> Result<R> {
    if !(z >= R::zero()) {
        return Err(CevError::domain("z", format!("must be >= 0, got {z}")));
    }
    if !(order > R::c(-1.0)) {
        return Err(CevError::domain(
            "order",
            format!("must be > -1, got {order}"),
        ));
    }
    if z == R::zero() {
        return Ok(if order == R::zero() {
            R::one()
        } else if order > R::zero() {
            R::zero()
        } else {
            R::infinity()
        });
    }
    let mu = R::c(4.0) * order * order;
    if z >= R::c(100.0) && mu <= z {
        bessel_i_scaled_asymptotic(mu, z)
    } else {
        bessel_i_scaled_series(order, z)
    }
}

// Hankel expansion: e^{-z} I_nu(z) ~ (2 pi z)^{-1/2} sum_k (-1)^k a_k(nu)/z^k.
fn bessel_i_scaled_asymptotic<R: Real>(mu: R, z: R) -> Result<R> {
    let eight_z = R::c(8.0) * z;
    let mut sum = R::one();
    let mut term = R::one();
    for k in 1..1000 {
        let odd = R::c((2 * k - 1) as f64);
        let next = term * -(mu - odd * odd) / (R::c(k as f64) * eight_z);
        if next.abs() >= term.abs() && k > 1 {
            break; // asymptotic tail starts growing
        }
        term = next;
        sum += term;
        if term.abs() < sum.abs() * R::epsilon() {
            break;
        }
    }
    let two_pi = R::c(2.0 * std::f64::consts::PI);
    Ok(sum / (two_pi * z).sqrt())
}

// Power series in log space with periodic renormalization; all terms are
// positive, so there is no cancellation at any argument.
fn bessel_i_scaled_series<R: Real>(order: R, z: R) -> Result<R> {
    let half_z = z * R::c(0.5);
    let q = half_z * half_z;
    let ln_pref = order * half_z.ln() - z - ln_gamma_unchecked(order + R::one());
    let big = R::c(1e250);
    let ln_big = R::c(250.0 * std::f64::consts::LN_10);
    let mut term = R::one();
    let mut sum = R::one();
    let mut scale = R::zero();
    for j in 1..10_000_000usize {
        term *= q / (R::c(j as f64) * (order + R::c(j as f64)));
        sum += term;
        if term < sum * R::epsilon() {
            return Ok((ln_pref + scale + sum.ln()).exp());
        }
        if sum > big {
            sum /= big;
            term /= big;
            scale += ln_big;
        }
    }
    Err(CevError::NonConvergence {
        terms: 10_000_000,
        context: "bessel_i_scaled series",
    })
}

/// Survival function `Q(w; df, lambda)` of the non-central chi-squared
/// distribution, `df > 0`.
pub fn nc_chi2_sf<R: Real>(q: &NcChi2Query<R>, ctl: &SeriesControl) -> Result<R> {
    ctl.validate()?;
    if !(q.df > R::zero()) {
        return Err(CevError::domain(
            "df",
            format!("direct series requires df > 0, got {}", q.df),
        ));
    }
    if !(q.w >= R::zero()) {
        return Err(CevError::domain("w", format!("must be >= 0, got {}", q.w)));
    }
    if !(q.noncentrality >= R::zero()) {
        return Err(CevError::domain(
            "noncentrality",
            format!("must be >= 0, got {}", q.noncentrality),
        ));
    }
    if q.w == R::zero() {
        return Ok(R::one());
    }
    let x = q.noncentrality * R::c(0.5);
    let y = q.w * R::c(0.5);
    let v = q.df * R::c(0.5);
    if x == R::zero() {
        return reg_gamma_upper(v, y);
    }

    let rel_tol = R::c(ctl.rel_tol);
    let zero_log = R::c(ctl.log_space_threshold);

    // dominant Poisson index n* = floor(x) + 1
    let n_star = x.floor().as_f64() as u64 + 1;
    let n_star_r = R::c(n_star as f64);
    let a_star = n_star_r + v - R::one();

    // logs of the starting factors; everything else follows by recurrence
    // (g(n, x) is the Poisson(x) mass at n-1)
    let ln_g_star = ln_poisson_pmf(n_star_r - R::one(), x);
    let g_star = if ln_g_star < zero_log {
        R::zero()
    } else {
        ln_g_star.exp()
    };
    let gg_star = reg_gamma_upper(a_star, y)?;
    // d(a) = y^a e^{-y} / Gamma(a+1) = poisson_pmf(a; y): the
    // G(a, y) -> G(a+1, y) increment
    let d_at = |a: R| -> R {
        let ln_d = ln_poisson_pmf(a, y);
        if ln_d < zero_log {
            R::zero()
        } else {
            ln_d.exp()
        }
    };

    let mut sum = g_star * gg_star;
    let mut used = 1usize;

    // ascending: n = n* + 1, n* + 2, ...
    {
        let mut g = g_star;
        let mut gg = gg_star;
        let mut d = d_at(a_star);
        let mut a = a_star;
        let mut n = n_star_r;
        let mut prev = R::infinity();
        loop {
            g *= x / n;
            gg = (gg + d).min(R::one());
            a += R::one();
            n += R::one();
            d *= y / a;
            let term = g * gg;
            sum += term;
            used += 1;
            if used >= ctl.max_terms {
                return Err(CevError::NonConvergence {
                    terms: ctl.max_terms,
                    context: "nc_chi2_sf ascending",
                });
            }
            if term == R::zero() || (term <= rel_tol * sum && term < prev && n > x) {
                break;
            }
            prev = term;
        }
    }

    // descending: n = n* - 1, ..., 1
    if n_star > 1 {
        let mut g = g_star;
        let mut gg = gg_star;
        // d(a* - 1) seeds the downward G recurrence
        let mut d = d_at(a_star - R::one());
        let mut a = a_star;
        let mut n = n_star_r;
        let mut prev = R::infinity();
        loop {
            g *= (n - R::one()) / x;
            gg = (gg - d).max(R::zero());
            a -= R::one();
            n -= R::one();
            // d(a-1) = d(a) * a / y, with a already decremented
            d *= a / y;
            let term = g * gg;
            sum += term;
            used += 1;
            if used >= ctl.max_terms {
                return Err(CevError::NonConvergence {
                    terms: ctl.max_terms,
                    context: "nc_chi2_sf descending",
                });
            }
            if n <= R::one() + R::c(0.5) {
                break; // n == 1 reached
            }
            if term == R::zero() || (term <= rel_tol * sum && term < prev) {
                break;
            }
            prev = term;
        }
    }

    Ok(sum.max(R::zero()).min(R::one()))
}

/// Survival function at negative or zero degrees of freedom, defined through
/// the swapped-argument complement `Q(w; 2-2v, lambda) = 1 - Q(lambda; 2v, w)`
/// with `2v = 2 - df`.
pub fn nc_chi2_sf_complement_df<R: Real>(
    w: R,
    df: R,
    lambda: R,
    ctl: &SeriesControl,
) -> Result<R> {
    let swapped = NcChi2Query {
        w: lambda,
        df: R::c(2.0) - df,
        noncentrality: w,
    };
    let q = nc_chi2_sf(&swapped, ctl)?;
    Ok((R::one() - q).max(R::zero()).min(R::one()))
}

/// Non-central chi-squared density
/// `p(w; df, lambda) = 1/2 e^{-(lambda+w)/2} (w/lambda)^{(df-2)/4} I_{(df-2)/2}(sqrt(lambda w))`,
/// evaluated in log space so the exponential factors cancel without overflow.
/// `lambda = 0` falls back to the central chi-squared density.
pub fn nc_chi2_pdf<R: Real>(q: &NcChi2Query<R>) -> Result<R> {
    if !(q.w > R::zero()) {
        return Err(CevError::domain("w", format!("must be > 0, got {}", q.w)));
    }
    if !(q.df > R::zero()) {
        return Err(CevError::domain(
            "df",
            format!("must be > 0, got {}", q.df),
        ));
    }
    if !(q.noncentrality >= R::zero()) {
        return Err(CevError::domain(
            "noncentrality",
            format!("must be >= 0, got {}", q.noncentrality),
        ));
    }
    let w = q.w;
    let df = q.df;
    let lam = q.noncentrality;
    let half = R::c(0.5);
    if lam == R::zero() {
        // central chi-squared density
        let hdf = df * half;
        let ln_p = (hdf - R::one()) * w.ln() - w * half
            - hdf * R::c(std::f64::consts::LN_2)
            - ln_gamma_unchecked(hdf);
        return Ok(ln_p.exp());
    }
    let order = (df - R::c(2.0)) * half;
    let z = (lam * w).sqrt();
    let scaled = bessel_i_scaled(order, z)?;
    if scaled == R::zero() {
        return Ok(R::zero());
    }
    // -(lam+w)/2 + sqrt(lam w) == -(sqrt(lam)-sqrt(w))^2 / 2
    let diff = lam.sqrt() - w.sqrt();
    let ln_p = -R::c(std::f64::consts::LN_2) - diff * diff * half
        + (df - R::c(2.0)) * R::c(0.25) * (w.ln() - lam.ln())
        + scaled.ln();
    Ok(ln_p.exp().max(R::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q64(w: f64, df: f64, lam: f64) -> NcChi2Query<f64> {
        NcChi2Query {
            w,
            df,
            noncentrality: lam,
        }
    }

    const CTL: SeriesControl = SeriesControl {
        rel_tol: 1e-13,
        max_terms: 1_000_000,
        log_space_threshold: -745.0,
    };

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0f64).unwrap().abs() < 1e-14);
        assert!(ln_gamma(2.0f64).unwrap().abs() < 1e-14);
        let half = ln_gamma(0.5f64).unwrap();
        assert!((half - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!(ln_gamma(0.0f64).is_err());
        assert!(ln_gamma(-1.5f64).is_err());
    }

    #[test]
    fn ln_gamma_matches_statrs_over_range() {
        let mut a = 1e-3f64;
        while a <= 1e3 {
            let ours = ln_gamma(a).unwrap();
            let reference = statrs::function::gamma::ln_gamma(a);
            let tol = 1e-14 * reference.abs().max(1.0);
            assert!(
                (ours - reference).abs() <= tol,
                "a={a}: {ours} vs {reference}"
            );
            a *= 1.073;
        }
    }

    #[test]
    fn reg_gamma_upper_examples() {
        assert_eq!(reg_gamma_upper(1.0f64, 0.0).unwrap(), 1.0);
        let e1 = reg_gamma_upper(1.0f64, 1.0).unwrap();
        assert!((e1 - (-1.0f64).exp()).abs() < 1e-15);
        // frozen quadrature/extended-precision reference
        let v = reg_gamma_upper(2.5f64, 3.7).unwrap();
        assert!((v - 0.19255043307939576).abs() < 1e-13, "{v}");
        assert!(reg_gamma_upper(-1.0f64, 1.0).is_err());
        assert!(reg_gamma_upper(1.0f64, -0.5).is_err());
    }

    #[test]
    fn reg_gamma_upper_decreasing_in_y() {
        let a = 3.3f64;
        let mut prev = reg_gamma_upper(a, 0.0).unwrap();
        for i in 1..60 {
            let y = 0.25 * i as f64;
            let cur = reg_gamma_upper(a, y).unwrap();
            assert!(cur <= prev + 1e-15);
            prev = cur;
        }
    }

    #[test]
    fn bessel_scaled_trivials_and_frozen() {
        assert_eq!(bessel_i_scaled(0.0f64, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i_scaled(1.0f64, 0.0).unwrap(), 0.0);
        // frozen extended-precision series value of e^{-10} I_{1/2}(10)
        let v = bessel_i_scaled(0.5f64, 10.0).unwrap();
        assert!((v / 0.12615662584097982 - 1.0).abs() < 1e-12, "{v}");
        assert!(bessel_i_scaled(0.5f64, -1.0).is_err());
    }

    #[test]
    fn bessel_scaled_large_argument_regime() {
        for &z in &[100.0f64, 300.0, 1000.0, 1e4] {
            for &nu in &[0.0f64, 0.5, 1.0, 3.0] {
                let v = bessel_i_scaled(nu, z).unwrap();
                let leading = 1.0 / (2.0 * std::f64::consts::PI * z).sqrt();
                // first correction term of the large-z expansion bounds the
                // deviation from the leading order
                let mu = 4.0 * nu * nu;
                let bound = 1.2 * (mu - 1.0).abs() / (8.0 * z) + 1e-3;
                assert!((v / leading - 1.0).abs() < bound, "nu={nu} z={z}");
            }
        }
    }

    #[test]
    fn bessel_scaled_small_argument_regime() {
        for &z in &[1e-3f64, 1e-4, 1e-5] {
            for &nu in &[0.0f64, 0.5, 1.0, 2.5] {
                let v = bessel_i_scaled(nu, z).unwrap();
                let small = (z / 2.0).powf(nu) / statrs::function::gamma::gamma(nu + 1.0)
                    * (-z).exp();
                assert!((v / small - 1.0).abs() < 1e-6, "nu={nu} z={z}");
            }
        }
    }

    #[test]
    fn bessel_series_and_asymptotic_agree_at_crossover() {
        for &nu in &[0.0f64, 0.75, 2.0, 5.0] {
            let z = 150.0;
            let series = bessel_i_scaled_series(nu, z).unwrap();
            let asym = bessel_i_scaled_asymptotic(4.0 * nu * nu, z).unwrap();
            assert!((series / asym - 1.0).abs() < 1e-12, "nu={nu}");
        }
    }

    #[test]
    fn sf_trivials() {
        assert_eq!(nc_chi2_sf(&q64(0.0, 2.0, 5.0), &CTL).unwrap(), 1.0);
        let central = nc_chi2_sf(&q64(2.0, 2.0, 0.0), &CTL).unwrap();
        assert!((central - (-1.0f64).exp()).abs() < 1e-14);
        assert!(nc_chi2_sf(&q64(1.0, -2.0, 1.0), &CTL).is_err());
        assert!(nc_chi2_sf(&q64(1.0, 0.0, 1.0), &CTL).is_err());
    }

    #[test]
    fn sf_frozen_bruteforce_value() {
        // frozen extended-precision brute-force sum of the g*G series
        let v = nc_chi2_sf(&q64(4.0, 2.0, 2.0), &CTL).unwrap();
        assert!((v - 0.39429685889233157).abs() < 1e-12, "{v}");
    }

    #[test]
    fn sf_far_tail_is_tiny() {
        for &(df, lam) in &[(2.0f64, 5.0f64), (7.5, 30.0), (1.2, 0.5)] {
            let w = lam + df + 40.0 * (2.0 * lam + df).sqrt();
            let v = nc_chi2_sf(&q64(w, df, lam), &CTL).unwrap();
            assert!(v < 1e-6, "df={df} lam={lam}: {v}");
        }
    }

    #[test]
    fn sf_monotone_in_w_and_lambda() {
        let ws: Vec<f64> = (1..40).map(|i| 0.5 * i as f64).collect();
        let mut prev = 1.0;
        for &w in &ws {
            let v = nc_chi2_sf(&q64(w, 3.0, 4.0), &CTL).unwrap();
            assert!(v <= prev + 1e-13);
            prev = v;
        }
        let mut prev = 0.0;
        for i in 0..40 {
            let lam = 0.5 * i as f64;
            let v = nc_chi2_sf(&q64(6.0, 3.0, lam), &CTL).unwrap();
            assert!(v >= prev - 1e-13);
            prev = v;
        }
    }

    #[test]
    fn sf_large_noncentrality() {
        // far left tail at large lambda: survival ~ 1
        let v = nc_chi2_sf(&q64(1e4, 2.0, 4e4), &CTL).unwrap();
        assert!(v > 1.0 - 1e-9, "{v}");
        // far right tail at large lambda: survival ~ 0
        let v = nc_chi2_sf(&q64(9e4, 2.0, 4e4), &CTL).unwrap();
        assert!(v < 1e-9, "{v}");
    }

    #[test]
    fn complement_df_identity_and_frozen() {
        // definitional pair identity
        let a = nc_chi2_sf_complement_df(3.0f64, -0.5, 2.0, &CTL).unwrap();
        let b = nc_chi2_sf(&q64(2.0, 2.5, 3.0), &CTL).unwrap();
        assert!((a + b - 1.0).abs() < 1e-15);
        // w = 0 endpoint: the identity reduces to the central complement
        let v = nc_chi2_sf_complement_df(0.0f64, 0.5, 4.0, &CTL).unwrap();
        let central = nc_chi2_sf(&q64(4.0, 1.5, 0.0), &CTL).unwrap();
        assert!((v + central - 1.0).abs() < 1e-15);
        // frozen: 1 - brute-force Q(2.2; 2.5, 3.1)
        let v = nc_chi2_sf_complement_df(3.1f64, -0.5, 2.2, &CTL).unwrap();
        assert!((v - 0.21809758973459185).abs() < 1e-12, "{v}");
    }

    #[test]
    fn pdf_central_fallback_and_frozen() {
        let v = nc_chi2_pdf(&q64(1.0, 2.0, 0.0)).unwrap();
        assert!((v - 0.5 * (-0.5f64).exp()).abs() < 1e-15);
        // lambda -> 0+ is continuous with the central fallback
        let v_eps = nc_chi2_pdf(&q64(1.0, 2.0, 1e-12)).unwrap();
        assert!((v_eps - v).abs() < 1e-12);
        // frozen extended-precision value of the defining formula
        let v = nc_chi2_pdf(&q64(5.0, 3.0, 4.0)).unwrap();
        assert!((v - 0.09698223803597221).abs() < 1e-14, "{v}");
        assert!(nc_chi2_pdf(&q64(0.0, 3.0, 4.0)).is_err());
    }

    #[test]
    fn pdf_matches_sf_derivative_in_w() {
        // dQ/dw = -p(w; df, lambda)
        for &(w, df, lam) in &[(4.0f64, 3.0f64, 2.0f64), (1.5, 5.0, 7.0), (10.0, 2.5, 4.0)] {
            let h = 1e-5 * w.max(1.0);
            let up = nc_chi2_sf(&q64(w + h, df, lam), &CTL).unwrap();
            let dn = nc_chi2_sf(&q64(w - h, df, lam), &CTL).unwrap();
            let fd = (up - dn) / (2.0 * h);
            let p = nc_chi2_pdf(&q64(w, df, lam)).unwrap();
            assert!(
                (fd + p).abs() <= 1e-6 * p.abs().max(1e-12),
                "w={w} df={df} lam={lam}: fd={fd} p={p}"
            );
        }
    }

    #[test]
    fn pdf_matches_sf_derivative_in_lambda() {
        // dQ/dlambda = p(w; df + 2, lambda)
        for &(w, df, lam) in &[(4.0f64, 3.0f64, 2.0f64), (1.5, 5.0, 7.0), (10.0, 2.5, 4.0)] {
            let h = 1e-5 * lam.max(1.0);
            let up = nc_chi2_sf(&q64(w, df, lam + h), &CTL).unwrap();
            let dn = nc_chi2_sf(&q64(w, df, lam - h), &CTL).unwrap();
            let fd = (up - dn) / (2.0 * h);
            let p = nc_chi2_pdf(&q64(w, df + 2.0, lam)).unwrap();
            assert!(
                (fd - p).abs() <= 1e-6 * p.abs().max(1e-12),
                "w={w} df={df} lam={lam}: fd={fd} p={p}"
            );
        }
    }

    #[test]
    fn pdf_recurrence_in_w() {
        // dp/dw = (-p(w; df, lam) + p(w; df-2, lam)) / 2, df > 2
        for &(w, df, lam) in &[(4.0f64, 5.0f64, 2.0f64), (2.5, 6.5, 7.0), (8.0, 4.0, 3.0)] {
            let h = 1e-5 * w;
            let up = nc_chi2_pdf(&q64(w + h, df, lam)).unwrap();
            let dn = nc_chi2_pdf(&q64(w - h, df, lam)).unwrap();
            let fd = (up - dn) / (2.0 * h);
            let rhs = 0.5
                * (-nc_chi2_pdf(&q64(w, df, lam)).unwrap()
                    + nc_chi2_pdf(&q64(w, df - 2.0, lam)).unwrap());
            assert!(
                (fd - rhs).abs() <= 1e-6 * rhs.abs().max(1e-12),
                "w={w} df={df}: fd={fd} rhs={rhs}"
            );
        }
    }

    #[test]
    fn f32_instantiation_is_usable() {
        let v = nc_chi2_sf(
            &NcChi2Query {
                w: 2.0f32,
                df: 2.0,
                noncentrality: 0.0,
            },
            &CTL,
        )
        .unwrap();
        assert!((v - (-1.0f32).exp()).abs() < 1e-5);
        let b = bessel_i_scaled(0.5f32, 10.0f32).unwrap();
        assert!((b - 0.126156626).abs() < 1e-5);
    }
}
