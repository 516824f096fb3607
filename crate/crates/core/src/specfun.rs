//! Special functions used by the kernels: complex log-Gamma, q-Pochhammer
//! symbols, the dilogarithm, Bessel J and Airy Ai.
//!
//! Everything here is self-contained double precision. Each routine states
//! the argument range it is validated on.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

// B_{2k} / (2k (2k-1)) for the Stirling series.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Principal branch of `log Γ(z)`.
///
/// Stirling's series after shifting `Re z` up to at least 10. The shift
/// `log Γ(z) = log Γ(z+k) - Σ_{j<k} log(z+j)` keeps the principal branch,
/// since every cut of the sum lies on the negative real axis.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && is_nonpositive_integer(z.re) {
        return Err(Error::Singularity(format!("log_gamma pole at z = {}", z.re)));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidInput("log_gamma of non-finite argument".into()));
    }
    Ok(log_gamma_unchecked(z))
}

fn log_gamma_unchecked(z: Complex64) -> Complex64 {
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 10.0 || w.re < 10.0 {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        series += p * c;
        p *= inv2;
    }
    (w - 0.5) * w.ln() - w + LN_SQRT_2PI + series - shift
}

/// `log Γ(x)` for real `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    log_gamma_unchecked(Complex64::new(x, 0.0)).re
}

/// `Γ(x)` for real `x`, `NaN` at the poles.
pub fn gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::NAN;
    }
    if x > 0.0 {
        return ln_gamma(x).exp();
    }
    PI / ((PI * x).sin() * gamma(1.0 - x))
}

/// `1/Γ(x)` for real `x`; zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else if x > 0.0 {
        (-ln_gamma(x)).exp()
    } else {
        (PI * x).sin() * gamma(1.0 - x) / PI
    }
}

/// `(x; u)_n = Π_{0≤i<n} (1 - x u^i)`.
pub fn qpoch_finite(x: f64, u: f64, n: usize) -> f64 {
    let mut p = 1.0;
    let mut t = x;
    for _ in 0..n {
        p *= 1.0 - t;
        t *= u;
    }
    p
}

/// Complex-argument `(x; u)_n`.
pub fn qpoch_finite_c(x: Complex64, u: f64, n: usize) -> Complex64 {
    let mut p = Complex64::new(1.0, 0.0);
    let mut t = x;
    for _ in 0..n {
        p *= 1.0 - t;
        t *= u;
    }
    p
}

/// `(x; u)_∞`, truncated once `|x u^i| < tol (1 - u)`.
pub fn qpoch_inf(x: f64, u: f64, tol: f64) -> Result<f64> {
    Ok(qpoch_inf_c(Complex64::new(x, 0.0), u, tol)?.re)
}

/// Complex-argument `(x; u)_∞`.
pub fn qpoch_inf_c(x: Complex64, u: f64, tol: f64) -> Result<Complex64> {
    if !(0.0..1.0).contains(&u.abs()) || u.is_nan() {
        return Err(Error::ParameterOutOfRange(format!("qpoch_inf needs |u| < 1, got {u}")));
    }
    let cutoff = tol * (1.0 - u.abs());
    let mut p = Complex64::new(1.0, 0.0);
    let mut t = x;
    while t.norm() >= cutoff {
        p *= 1.0 - t;
        t *= u;
    }
    // remaining factors contribute exp(-Σ t u^i) to first order
    p *= (-(t / (1.0 - u))).exp();
    Ok(p)
}

/// Four-term small-`r` expansion of `log (u^c; u)_∞` with `u = e^{-r}`.
pub fn qpoch_asymptotic(c: f64, r: f64) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::Singularity(format!("Γ(c) has a pole at c = {c}")));
    }
    if r <= 0.0 {
        return Err(Error::ParameterOutOfRange(format!("need r > 0, got {r}")));
    }
    let log_gamma_c = log_gamma_unchecked(Complex64::new(c, 0.0)).re;
    Ok(-PI * PI / (6.0 * r) + (0.5 - c) * r.ln() + 0.5 * (2.0 * PI).ln() - log_gamma_c)
}

/// Real dilogarithm `Li₂(x)` for `x ≤ 1`.
pub fn dilog(x: f64) -> Result<f64> {
    if x > 1.0 || x.is_nan() {
        return Err(Error::ParameterOutOfRange(format!("dilog needs x <= 1, got {x}")));
    }
    Ok(dilog_unchecked(x))
}

fn dilog_unchecked(x: f64) -> f64 {
    const PI2_6: f64 = PI * PI / 6.0;
    if x == 1.0 {
        PI2_6
    } else if x == 0.0 {
        0.0
    } else if x < -0.5 {
        // Landen: Li₂(x) = -Li₂(x/(x-1)) - ½ log²(1-x), maps to (0, 1)
        let y = x / (x - 1.0);
        let l = (1.0 - x).ln();
        -dilog_unchecked(y) - 0.5 * l * l
    } else if x <= 0.5 {
        dilog_series(x)
    } else {
        // reflection about 1/2
        PI2_6 - x.ln() * (1.0 - x).ln() - dilog_series(1.0 - x)
    }
}

fn dilog_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut p = x;
    let mut n = 1.0;
    while p.abs() > 1e-18 * n * n {
        sum += p / (n * n);
        p *= x;
        n += 1.0;
    }
    sum
}

/// Bessel function of the first kind `J_ν(x)`, `ν ≥ 0`, `x ≥ 0`.
///
/// Power series for `x ≤ 8`; above that the Schläfli integral
/// `J_ν(x) = π⁻¹∫₀^π cos(ντ - x sin τ)dτ - sin(νπ)/π ∫₀^∞ e^{-x sinh t - νt} dt`
/// by composite Gauss–Legendre, which stays accurate where the series
/// cancels catastrophically.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if nu < 0.0 || x < 0.0 || !nu.is_finite() || !x.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("bessel_j needs nu, x >= 0 (nu={nu}, x={x})")));
    }
    Ok(bessel_j_unchecked(nu, x))
}

/// `J_ν(x)` for any real order with `ν > -1` or `ν` an integer, `x ≥ 0`.
pub(crate) fn bessel_j_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= 8.0 {
        bessel_j_series(nu, x)
    } else {
        bessel_j_integral(nu, x)
    }
}

fn bessel_j_series(nu: f64, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = h.powf(nu) * rgamma(nu + 1.0);
    let mut sum = term;
    let q = -h * h;
    let mut i = 1.0;
    loop {
        term *= q / (i * (i + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && i > h {
            break;
        }
        i += 1.0;
        if i > 500.0 {
            break;
        }
    }
    sum
}

fn gl20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

fn bessel_j_integral(nu: f64, x: f64) -> f64 {
    let gl = gl20();
    let panels = ((x + nu) / 2.0).ceil() as usize + 4;
    let first = gl.composite(0.0, PI, panels, |t| (nu * t - x * t.sin()).cos()) / PI;
    let s = (nu * PI).sin();
    if s.abs() < 1e-15 {
        return first;
    }
    // e^{-x sinh t} < e^{-45} beyond this point
    let t_max = (45.0 / x).asinh() + 0.5;
    let second = gl.composite(0.0, t_max, 16, |t| (-x * t.sinh() - nu * t).exp());
    first - s / PI * second
}

/// `J'_ν(x)` via `J'_ν = (ν/x) J_ν - J_{ν+1}`.
pub fn bessel_j_prime(nu: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(if nu == 1.0 {
            0.5
        } else if nu == 0.0 || nu > 1.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    Ok(nu / x * bessel_j(nu, x)? - bessel_j(nu + 1.0, x)?)
}

/// `K_ν(z) = ∫₀^∞ e^{-z cosh t} cosh(νt) dt` for `z > 0` by the trapezoidal
/// rule, which converges geometrically for this even analytic integrand.
fn bessel_k(nu: f64, z: f64) -> f64 {
    let h = 0.05f64;
    let mut sum = 0.5 * (-z).exp();
    let mut k = 1.0;
    loop {
        let t = k * h;
        let v = (-z * t.cosh()).exp() * (nu * t).cosh();
        sum += v;
        if z * (t.cosh() - 1.0) > 50.0 {
            break;
        }
        k += 1.0;
    }
    sum * h
}

const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = -0.258_819_403_792_806_8;

/// Validated argument range of [`airy`].
pub const AIRY_RANGE: (f64, f64) = (-15.0, 30.0);

/// `(Ai(x), Ai'(x))` for `x ∈ [-15, 30]`.
///
/// Maclaurin series on `|x| ≤ 5`; for `x > 5` the Macdonald-function form
/// `Ai(x) = π⁻¹√(x/3) K_{1/3}(ζ)`, for `x < -5` the Bessel form
/// `Ai(-z) = (√z/3)(J_{1/3}(ζ) + J_{-1/3}(ζ))`, with `ζ = (2/3)|x|^{3/2}`.
pub fn airy(x: f64) -> Result<(f64, f64)> {
    if !(AIRY_RANGE.0..=AIRY_RANGE.1).contains(&x) {
        return Err(Error::ParameterOutOfRange(format!("airy validated on [-15, 30], got {x}")));
    }
    Ok(airy_unchecked(x))
}

pub(crate) fn airy_unchecked(x: f64) -> (f64, f64) {
    if x.abs() <= 5.0 {
        airy_maclaurin(x)
    } else if x > 0.0 {
        let zeta = 2.0 / 3.0 * x.powf(1.5);
        let ai = (x / 3.0).sqrt() / PI * bessel_k(1.0 / 3.0, zeta);
        let aip = -x / (PI * 3f64.sqrt()) * bessel_k(2.0 / 3.0, zeta);
        (ai, aip)
    } else {
        let z = -x;
        let zeta = 2.0 / 3.0 * z.powf(1.5);
        let j = |nu: f64| bessel_j_unchecked(nu, zeta);
        let ai = z.sqrt() / 3.0 * (j(1.0 / 3.0) + j(-1.0 / 3.0));
        let aip = z / 3.0 * (j(2.0 / 3.0) - j(-2.0 / 3.0));
        (ai, aip)
    }
}

fn airy_maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f = Σ a_k x^{3k}, g = Σ b_k x^{3k+1}
    let (mut a, mut b) = (1.0, 1.0);
    let (mut f, mut g) = (1.0, x);
    let (mut fp, mut gp) = (0.0, 1.0);
    let mut pow3k = 1.0; // x^{3k}
    for k in 1..200 {
        let kf = k as f64;
        a /= (3.0 * kf - 1.0) * (3.0 * kf);
        b /= (3.0 * kf) * (3.0 * kf + 1.0);
        let prev = pow3k;
        pow3k *= x3;
        let tf = a * pow3k;
        let tg = b * pow3k * x;
        f += tf;
        g += tg;
        // x^{3k-1} = x^{3k-3} x^2
        fp += 3.0 * kf * a * prev * x * x;
        gp += (3.0 * kf + 1.0) * b * pow3k;
        if tf.abs() + tg.abs() < 1e-18 * (f.abs() + g.abs()) && k > 3 {
            break;
        }
    }
    (AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp)
}
