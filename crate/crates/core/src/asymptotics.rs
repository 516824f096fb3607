//! Scaling maps of the limit theorems, the saddle-point constants of the
//! Tracy–Widom regime, and the limiting distribution functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fredholm::{fdet_semiinfinite, FredholmResult};
use crate::kernels::{AiryKernel, KernelFn, KheTildeKernel};
use crate::specfun::dilog;

/// Saddle-point data for `0 < a < 1`: `b = √a`, the double critical point
/// `z_c` of `S(·, v_c)`, the critical velocity `v_c`, and the centering and
/// scale constants `c1 = v_c`, `c2 = ((z∂_z)³S / 2)^{1/3}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TWConstants {
    pub b: f64,
    pub z_c: f64,
    pub v_c: f64,
    pub c1: f64,
    pub c2: f64,
}

fn check_exponents(eta: f64, theta: f64) -> Result<()> {
    if !(eta > 0.0 && theta > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("need eta, theta > 0 (got {eta}, {theta})")));
    }
    Ok(())
}

/// Positive root of `θz² + b(η - θ)z - η = 0`.
pub fn critical_point(b: f64, eta: f64, theta: f64) -> Result<f64> {
    check_exponents(eta, theta)?;
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("need 0 < b < 1, got {b}")));
    }
    let d = theta - eta;
    Ok((b * d + (4.0 * eta * theta + b * b * d * d).sqrt()) / (2.0 * theta))
}

/// `S(z, v) = Li₂(bz)/η - Li₂(b/z)/θ - v log z`.
pub fn action_s(z: f64, v: f64, b: f64, eta: f64, theta: f64) -> Result<f64> {
    check_exponents(eta, theta)?;
    if !(b * z > 0.0 && b * z < 1.0 && b / z > 0.0 && b / z < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("S needs 0 < bz < 1 and 0 < b/z < 1 (b = {b}, z = {z})")));
    }
    Ok(dilog(b * z)? / eta - dilog(b / z)? / theta - v * z.ln())
}

/// `(z∂_z)³S`, independent of `v`.
pub fn third_log_derivative(z: f64, b: f64, eta: f64, theta: f64) -> f64 {
    let (u, w) = (b * z, b / z);
    u / (eta * (1.0 - u).powi(2)) + w / (theta * (1.0 - w).powi(2))
}

pub fn tw_constants(a: f64, eta: f64, theta: f64) -> Result<TWConstants> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("need 0 < a < 1, got {a}")));
    }
    let b = a.sqrt();
    let z_c = critical_point(b, eta, theta)?;
    let v_c = -(1.0 - b * z_c).ln() / eta - (1.0 - b / z_c).ln() / theta;
    let c2 = (0.5 * third_log_derivative(z_c, b, eta, theta)).cbrt();
    Ok(TWConstants { b, z_c, v_c, c1: v_c, c2 })
}

/// `εL + log(εη)/η + log(εθ)/θ`.
pub fn thm1_center(l: f64, eps: f64, eta: f64, theta: f64) -> f64 {
    eps * l + (eps * eta).ln() / eta + (eps * theta).ln() / theta
}

/// Inverse of [`thm1_center`] in `L`.
pub fn thm1_uncenter(s: f64, eps: f64, eta: f64, theta: f64) -> f64 {
    (s - (eps * eta).ln() / eta - (eps * theta).ln() / theta) / eps
}

/// `(L - c1/ε) / (c2 ε^{-1/3})`.
pub fn thm2_center(l: f64, eps: f64, c: &TWConstants) -> f64 {
    (l - c.c1 / eps) / (c.c2 * eps.powf(-1.0 / 3.0))
}

/// `L M^{-1/η} N^{-1/θ}`.
pub fn thm4_scale(l: f64, m: usize, n: usize, eta: f64, theta: f64) -> f64 {
    l * (m as f64).powf(-1.0 / eta) * (n as f64).powf(-1.0 / theta)
}

pub fn gumbel_cdf(s: f64) -> f64 {
    (-(-s).exp()).exp()
}

/// Convergence target of the node doubling in [`half_line_gap`].
pub const LIMIT_CDF_TOL: f64 = 1e-9;
const MAX_NODES: usize = 512;

/// `det(1 - K)` on `L²(s, ∞)`, with the half-line map scaled to the point
/// where the diagonal falls below `1e-17` and nodes doubled until stable.
pub fn half_line_gap(k: &impl KernelFn, s: f64) -> Result<FredholmResult> {
    let mut x = s;
    let mut steps = 0;
    while k.eval(x, x)?.abs() >= 1e-17 {
        x += 0.25;
        steps += 1;
        if steps > 4000 {
            return Err(Error::NonConvergence(format!("kernel diagonal does not decay past s = {s}")));
        }
    }
    let scale = ((x - s) / 5.0).max(0.05);
    let mut n = 24;
    loop {
        let r = fdet_semiinfinite(k, s, scale, n)?;
        if r.est_error <= LIMIT_CDF_TOL || 2 * n >= MAX_NODES {
            return Ok(r);
        }
        n *= 2;
    }
}

/// `F_α(s) = det(1 - K̃_he)` on `L²(s, ∞)`.
pub fn f_alpha(s: f64, alpha: f64, eta: f64, theta: f64) -> Result<f64> {
    half_line_gap(&KheTildeKernel::new(alpha, eta, theta)?, s)?.probability()
}

/// Tracy–Widom GUE distribution `det(1 - A)` on `L²(s, ∞)`.
pub fn f_tw(s: f64) -> Result<f64> {
    half_line_gap(&AiryKernel, s)?.probability()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Five-point central difference.
    fn d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h)
    }

    #[test]
    fn critical_point_examples() {
        for e in [0.5, 1.0, 3.0] {
            assert!((critical_point(0.3, e, e).unwrap() - 1.0).abs() < 1e-15);
        }
        let z = critical_point(0.5, 1.0, 2.0).unwrap();
        assert!((z - (0.5 + 8.25f64.sqrt()) / 4.0).abs() < 1e-15);
        assert!((2.0 * z * z + 0.5 * (1.0 - 2.0) * z - 1.0).abs() < 1e-14);
        assert!(critical_point(0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn log_derivatives_vanish_at_the_saddle() {
        for (a, eta, theta) in [(0.25, 1.0, 1.0), (0.5, 1.0, 2.0), (0.6, 2.0, 0.8)] {
            let c = tw_constants(a, eta, theta).unwrap();
            // S as a function of log z
            let s = |t: f64| action_s(t.exp(), c.v_c, c.b, eta, theta).unwrap();
            let t0 = c.z_c.ln();
            let first = d1(s, t0, 1e-4);
            let second = d1(|t| d1(s, t, 1e-3), t0, 1e-3);
            assert!(first.abs() < 1e-10, "{first}");
            assert!(second.abs() < 1e-5, "{second}");
            // the first derivative in closed form
            let g = |t: f64| {
                let z = t.exp();
                -(1.0 - c.b * z).ln() / eta - (1.0 - c.b / z).ln() / theta - c.v_c
            };
            assert!(g(t0).abs() < 1e-14);
            assert!(d1(g, t0, 2e-4).abs() < 1e-10, "{}", d1(g, t0, 2e-4));
            let third = d1(|t| d1(g, t, 1e-3), t0, 1e-3);
            let closed = third_log_derivative(c.z_c, c.b, eta, theta);
            assert!((third - closed).abs() < 1e-8 * closed.max(1.0), "{third} vs {closed}");
        }
    }

    #[test]
    fn tw_constants_unit_exponents() {
        let c = tw_constants(0.25, 1.0, 1.0).unwrap();
        assert!((c.z_c - 1.0).abs() < 1e-15);
        assert!((c.c1 - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!((c.c2 - 2f64.cbrt()).abs() < 1e-14);
        for a in [0.05, 0.3, 0.6, 0.95] {
            for (e, t) in [(1.0, 1.0), (0.5, 2.0), (3.0, 1.5)] {
                let c = tw_constants(a, e, t).unwrap();
                assert!(c.c2 > 0.0 && c.c1 > 0.0 && c.b * c.z_c < 1.0 && c.b / c.z_c < 1.0);
            }
        }
        assert!(tw_constants(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn action_at_unit_point() {
        let b: f64 = 0.4;
        let s = action_s(1.0, 3.0, b, 2.0, 0.5).unwrap();
        assert!((s - (dilog(b).unwrap() / 2.0 - dilog(b).unwrap() / 0.5)).abs() < 1e-15);
        assert!(action_s(3.0, 0.0, 0.4, 1.0, 1.0).is_err());
    }

    #[test]
    fn centering_maps() {
        assert_eq!(thm1_center(0.0, 1.0, 1.0, 1.0), 0.0);
        assert!((thm1_center(46.0, 0.1, 1.0, 1.0) - (4.6 + 2.0 * 0.1f64.ln())).abs() < 1e-14);
        let l = thm1_uncenter(thm1_center(17.0, 0.05, 1.5, 0.5), 0.05, 1.5, 0.5);
        assert!((l - 17.0).abs() < 1e-12);
        let c = tw_constants(0.25, 1.0, 1.0).unwrap();
        assert!(thm2_center(c.c1 / 0.05, 0.05, &c).abs() < 1e-12);
        assert_eq!(thm4_scale(3.0, 1, 1, 0.7, 2.0), 3.0);
        assert_eq!(thm4_scale(32.0, 4, 4, 1.0, 1.0), 2.0);
    }

    #[test]
    fn gumbel_values() {
        assert_eq!(gumbel_cdf(0.0), (-1.0f64).exp());
        assert!((gumbel_cdf(-(2f64.ln()).ln()) - 0.5).abs() < 1e-15);
        assert_eq!(gumbel_cdf(50.0), 1.0);
    }

    #[test]
    fn f_alpha_zero_is_gumbel() {
        for s in [-1.0, 0.0, 1.0, 2.0] {
            let f = f_alpha(s, 0.0, 1.0, 1.0).unwrap();
            assert!((f - gumbel_cdf(s)).abs() < 1e-4, "s={s}: {f}");
        }
    }

    #[test]
    fn limit_cdfs_are_monotone() {
        let mut prev = 0.0;
        for k in 0..8 {
            let s = -4.0 + k as f64;
            let v = f_tw(s).unwrap();
            assert!(v >= prev && v <= 1.0);
            prev = v;
        }
        let mut prev = 0.0;
        for k in 0..6 {
            let v = f_alpha(-2.0 + k as f64, 1.0, 1.0, 2.0).unwrap();
            assert!(v >= prev && v <= 1.0);
            prev = v;
        }
    }
}
