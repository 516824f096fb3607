//! Correlation kernels of the discrete and continuous ensembles.
//!
//! | kernel | route | oracle |
//! |---|---|---|
//! | `K_d` | FFT coefficient extraction on two circles | q-binomial Laurent series |
//! | `K_he` | double power series | wedge-contour quadrature |
//! | Bessel | closed form in `J_α(2√x)` | `∫₀¹ J_α(2√(ux)) J_α(2√(uy)) du` |
//! | `K_c` | finite residue sum | wedge-contour quadrature |
//! | Airy | closed form | vertical-line quadrature |
//!
//! The contour integrals of `K_he` and `K_c` are taken over wedges
//! `δ + r e^{±iφ}` (and `-δ - r e^{∓iφ}`) instead of vertical lines. The
//! wedges are homotopic to the lines without crossing a pole and the
//! integrands decay along them, while on the lines they need not.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Extent, ModelParams};
use crate::quad::GaussLegendre;
use crate::specfun::{airy, airy_unchecked, bessel_j_unchecked, ln_gamma, log_gamma, qpoch_finite_c, qpoch_inf_c, AIRY_RANGE};

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContourKind {
    /// `|z| = radius`; the paired `w`-circle of `K_d` has radius `2 - radius`.
    Circle { radius: f64 },
    /// `δ + i[-T, T]`, trapezoidal rule.
    VerticalLine { delta: f64, half_height: f64 },
    /// Rays `δ + r e^{±iφ}`, `0 ≤ r ≤ length`, Gauss–Legendre panels.
    Wedge { delta: f64, angle: f64, length: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub kind: ContourKind,
    pub nodes: usize,
}

impl ContourSpec {
    pub fn circle(radius: f64, nodes: usize) -> Result<Self> {
        Self { kind: ContourKind::Circle { radius }, nodes }.validated()
    }

    pub fn vertical_line(delta: f64, half_height: f64, nodes: usize) -> Result<Self> {
        Self { kind: ContourKind::VerticalLine { delta, half_height }, nodes }.validated()
    }

    pub fn wedge(delta: f64, angle: f64, length: f64, nodes: usize) -> Result<Self> {
        Self { kind: ContourKind::Wedge { delta, angle, length }, nodes }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.nodes < 16 || !self.nodes.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("contour node count must be even and >= 16, got {}", self.nodes)));
        }
        let ok = match self.kind {
            ContourKind::Circle { radius } => radius > 0.0 && radius.is_finite(),
            ContourKind::VerticalLine { delta, half_height } => delta > 0.0 && half_height > 0.0,
            ContourKind::Wedge { delta, angle, length } => delta > 0.0 && angle > 0.0 && angle < PI / 2.0 && length > 0.0,
        };
        if !ok {
            return Err(Error::InvalidInput(format!("invalid contour {:?}", self.kind)));
        }
        Ok(self)
    }
}

/// Where a kernel's arguments live.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    HalfIntegers,
    Interval(f64, f64),
}

/// A two-point kernel as seen by the Fredholm engines.
pub trait KernelFn: Sync {
    fn eval(&self, x: f64, y: f64) -> Result<f64>;

    fn domain(&self) -> Domain {
        Domain::Interval(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Row-major `K(xs[i], xs[j])`.
    fn matrix(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let n = xs.len();
        let rows: Result<Vec<Vec<f64>>> =
            xs.par_iter().map(|&x| xs.iter().map(|&y| self.eval(x, y)).collect()).collect();
        let mut out = Vec::with_capacity(n * n);
        for r in rows? {
            out.extend(r);
        }
        Ok(out)
    }
}

impl<K: KernelFn + ?Sized> KernelFn for &K {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        (**self).eval(x, y)
    }
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn matrix(&self, xs: &[f64]) -> Result<Vec<f64>> {
        (**self).matrix(xs)
    }
}

impl<K: KernelFn + ?Sized + Send> KernelFn for Box<K> {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        (**self).eval(x, y)
    }
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn matrix(&self, xs: &[f64]) -> Result<Vec<f64>> {
        (**self).matrix(xs)
    }
}

/// Closure-backed kernel, mostly for tests and simple separable kernels.
pub struct FnKernel<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Sync> KernelFn for FnKernel<F> {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok((self.0)(x, y))
    }
}

fn half_integer(k: f64) -> Result<i64> {
    let s = k + 0.5;
    if s.fract() != 0.0 || !s.is_finite() {
        return Err(Error::InvalidInput(format!("{k} is not a half-integer")));
    }
    Ok(s as i64)
}

// ---------------------------------------------------------------- K_d

/// `(x/z; Q̃)_N / (y z; Q)_M` with `x = √a Q̃^{1/2}`, `y = √a Q^{1/2}`.
#[derive(Debug, Clone, Copy)]
struct Fd {
    x: f64,
    y: f64,
    q_row: f64,
    q_col: f64,
    m: Extent,
    n: Extent,
}

const QPOCH_TOL: f64 = 1e-18;

impl Fd {
    fn new(p: &ModelParams) -> Result<Self> {
        p.validate()?;
        let (q_row, q_col) = (p.q_row(), p.q_col());
        let b = p.a.sqrt();
        let fd = Self { x: b * q_col.sqrt(), y: b * q_row.sqrt(), q_row, q_col, m: p.m, n: p.n };
        if p.a > 0.0 && ((p.m.is_infinite() && q_row >= 1.0) || (p.n.is_infinite() && q_col >= 1.0)) {
            return Err(Error::NonConvergentTail("infinite q-Pochhammer with Q = 1".into()));
        }
        Ok(fd)
    }

    fn qpoch(x: Complex64, u: f64, e: Extent) -> Result<Complex64> {
        match e {
            Extent::Finite(n) => Ok(qpoch_finite_c(x, u, n)),
            Extent::Infinite => qpoch_inf_c(x, u, QPOCH_TOL),
        }
    }

    fn numerator(&self, z: Complex64) -> Result<Complex64> {
        Self::qpoch(self.x / z, self.q_col, self.n)
    }

    fn denominator(&self, z: Complex64) -> Result<Complex64> {
        Self::qpoch(self.y * z, self.q_row, self.m)
    }

    /// Admissible `(inner, outer)` radii: `x < |w|` and `|z| < 1/y`.
    fn annulus(&self) -> (f64, f64) {
        let outer = if self.y > 0.0 { 1.0 / self.y } else { f64::INFINITY };
        (self.x, outer)
    }
}

/// Discrete kernel `K_d(k, ℓ) = Σ_{m ≥ 0} f_{k+1/2+m} g_{-ℓ-1/2-m}`, with `f`
/// and `g` the Laurent coefficients of `F_d` and `1/F_d`.
///
/// The coefficients come from one FFT of `F_d` on `|z| = r` and one of
/// `1/F_d` on `|w| = 2 - r`; this is the trapezoidal rule applied to the
/// double contour integral after expanding `√(zw)/(z-w)` in `w/z`.
#[derive(Debug, Clone)]
pub struct KdKernel {
    f: Vec<f64>,
    g: Vec<f64>,
    /// Index of the zeroth coefficient in `f` and `g`.
    offset: i64,
    /// Lowest usable index of `f` and highest of `g`, negated.
    window: i64,
    pub contour: ContourSpec,
    /// Largest imaginary part met among the extracted coefficients, relative
    /// to the largest modulus sampled on the respective circle.
    pub imag_residue: f64,
}

/// Tolerance on the relative imaginary part of extracted coefficients.
pub const KD_IMAG_TOL: f64 = 1e-12;

impl KdKernel {
    /// Chooses the circles halfway to the nearest singularity and enough
    /// nodes for the aliasing error to fall below `1e-20`.
    pub fn new(p: &ModelParams) -> Result<Self> {
        let c = Self::default_contour(p)?;
        Self::with_contour(p, c)
    }

    pub fn default_contour(p: &ModelParams) -> Result<ContourSpec> {
        let fd = Fd::new(p)?;
        let (inner, outer) = fd.annulus();
        let delta = (0.5 * (outer - 1.0)).min(0.5 * (1.0 - inner)).min(0.5);
        if !(delta > 0.0) {
            return Err(Error::Singularity("no annulus around the unit circle avoids the poles of F_d".into()));
        }
        let (rz, rw) = (1.0 + delta, 1.0 - delta);
        let rho = (fd.y * rz).max(fd.x / rw).max(1e-3);
        let mut nodes = 64usize;
        while rho.powf(nodes as f64 / 2.0) > 1e-20 {
            nodes *= 2;
            if nodes > 1 << 22 {
                return Err(Error::BudgetExceeded("K_d needs more than 2^22 nodes".into()));
            }
        }
        ContourSpec::circle(rz, nodes)
    }

    pub fn with_contour(p: &ModelParams, c: ContourSpec) -> Result<Self> {
        let ContourKind::Circle { radius: rz } = c.kind else {
            return Err(Error::InvalidInput("K_d needs a circle contour".into()));
        };
        let fd = Fd::new(p)?;
        let rw = 2.0 - rz;
        let (inner, outer) = fd.annulus();
        if !(rz > 1.0 && rz < outer && rw > inner) {
            return Err(Error::Singularity(format!(
                "circles |z|={rz}, |w|={rw} must satisfy {inner} < |w| < 1 < |z| < {outer}"
            )));
        }
        let n = c.nodes;
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n);
        let mut fz = Vec::with_capacity(n);
        let mut gw = Vec::with_capacity(n);
        for k in 0..n {
            let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
            let z = e * rz;
            let w = e * rw;
            fz.push(fd.numerator(z)? / fd.denominator(z)?);
            gw.push(fd.denominator(w)? / fd.numerator(w)?);
        }
        // rounding in the transform scales with the largest sample
        let mag = |v: &[Complex64]| v.iter().map(|x| x.norm()).fold(1.0, f64::max);
        let (mf, mg) = (mag(&fz), mag(&gw));
        fft.process(&mut fz);
        fft.process(&mut gw);
        let half = (n / 2) as i64;
        // Extraction divides by r^n, which amplifies rounding on the side
        // where r^{-n} > 1; that side is kept only up to a factor 1e4.
        let window = ((1e4f64.ln() / rz.ln().max(-rw.ln())).floor() as i64).clamp(8, half);
        let mut f = vec![0.0; n];
        let mut g = vec![0.0; n];
        let mut imag: f64 = 0.0;
        let scale = n as f64;
        for idx in -half..half {
            let slot = idx.rem_euclid(n as i64) as usize;
            let at = (idx + half) as usize;
            if idx >= -window {
                let cf = fz[slot] * ((-(idx as f64) * rz.ln()).exp() / scale);
                f[at] = cf.re;
                if idx.abs() <= 16 {
                    imag = imag.max(cf.im.abs() / mf);
                }
            }
            if idx <= window {
                let cg = gw[slot] * ((-(idx as f64) * rw.ln()).exp() / scale);
                g[at] = cg.re;
                if idx.abs() <= 16 {
                    imag = imag.max(cg.im.abs() / mg);
                }
            }
        }
        if imag > KD_IMAG_TOL {
            return Err(Error::NonConvergence(format!("imaginary residue {imag} in K_d coefficients")));
        }
        Ok(Self { f, g, offset: half, window, contour: c, imag_residue: imag })
    }

    fn f_at(&self, n: i64) -> f64 {
        let i = n + self.offset;
        if n < -self.window || i as usize >= self.f.len() {
            0.0
        } else {
            self.f[i as usize]
        }
    }

    fn g_at(&self, n: i64) -> f64 {
        let i = n + self.offset;
        if i < 0 || n > self.window {
            0.0
        } else {
            self.g[i as usize]
        }
    }

    /// Kernel at integer-shifted indices `k + 1/2 = ki`, `ℓ + 1/2 = li`.
    fn at(&self, ki: i64, li: i64) -> Result<f64> {
        if ki < -self.window || li < -self.window {
            return Err(Error::InvalidInput(format!(
                "K_d arguments below -{} are outside the extracted coefficient window",
                self.window
            )));
        }
        let top = self.offset;
        let m_max = (top - ki).min(top + 1 - li).max(0);
        let mut s = 0.0;
        for m in 0..m_max {
            s += self.f_at(ki + m) * self.g_at(-li - m);
        }
        Ok(s)
    }

    /// Laurent coefficient `[z^n] F_d`.
    pub fn coefficient_f(&self, n: i64) -> f64 {
        self.f_at(n)
    }

    /// Laurent coefficient `[w^n] 1/F_d`.
    pub fn coefficient_g(&self, n: i64) -> f64 {
        self.g_at(n)
    }
}

impl KernelFn for KdKernel {
    fn eval(&self, k: f64, l: f64) -> Result<f64> {
        self.at(half_integer(k)?, half_integer(l)?)
    }

    /// On consecutive lattice points uses `K(k, ℓ) = f_{k+1/2} g_{-ℓ-1/2} + K(k+1, ℓ+1)`
    /// from the last row and column inwards.
    fn matrix(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let n = xs.len();
        let idx: Vec<i64> = xs.iter().map(|&x| half_integer(x)).collect::<Result<_>>()?;
        if n == 0 || idx.windows(2).any(|w| w[1] != w[0] + 1) {
            let mut out = Vec::with_capacity(n * n);
            for &k in &idx {
                for &l in &idx {
                    out.push(self.at(k, l)?);
                }
            }
            return Ok(out);
        }
        let mut out = vec![0.0; n * n];
        for t in 0..n {
            out[(n - 1) * n + t] = self.at(idx[n - 1], idx[t])?;
            out[t * n + n - 1] = self.at(idx[t], idx[n - 1])?;
        }
        for i in (0..n - 1).rev() {
            for j in (0..n - 1).rev() {
                out[i * n + j] = self.f_at(idx[i]) * self.g_at(-idx[j]) + out[(i + 1) * n + j + 1];
            }
        }
        Ok(out)
    }

    fn domain(&self) -> Domain {
        Domain::HalfIntegers
    }
}

/// `K_d(k, ℓ)` for half-integers `k, ℓ` on the given circles.
pub fn kd_eval(k: f64, l: f64, p: &ModelParams, c: &ContourSpec) -> Result<f64> {
    KdKernel::with_contour(p, *c)?.eval(k, l)
}

/// Value and truncation bound of the series route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub truncation_error: f64,
}

/// Longest coefficient list [`kd_oracle`] will build.
pub const KD_ORACLE_BUDGET: usize = 200_000;

/// Coefficients of `(x t; u)_N` (`sign = -1`) or `1/(x t; u)_M` (`sign = +1`)
/// in powers of `t`, by the q-binomial theorem.
fn qbinomial_series(x: f64, u: f64, e: Extent, inverse: bool) -> Result<(Vec<f64>, f64)> {
    let mut c = vec![1.0];
    if x == 0.0 {
        return Ok((c, 0.0));
    }
    let mut peak: f64 = 1.0;
    let mut k = 1usize;
    loop {
        let kf = k as f64;
        let prev = c[k - 1];
        // ratio c_k / c_{k-1}
        let r = match (e, inverse) {
            (Extent::Finite(n), false) => {
                if k > n {
                    break;
                }
                let num = if u == 1.0 { (n + 1 - k) as f64 } else { 1.0 - u.powi((n + 1 - k) as i32) };
                let den = if u == 1.0 { kf } else { 1.0 - u.powi(k as i32) };
                -x * u.powi(k as i32 - 1) * num / den
            }
            (Extent::Infinite, false) => -x * u.powi(k as i32 - 1) / (1.0 - u.powi(k as i32)),
            (Extent::Finite(m), true) => {
                let num = if u == 1.0 { (m + k - 1) as f64 } else { 1.0 - u.powi((m + k - 1) as i32) };
                let den = if u == 1.0 { kf } else { 1.0 - u.powi(k as i32) };
                x * num / den
            }
            (Extent::Infinite, true) => x / (1.0 - u.powi(k as i32)),
        };
        let next = prev * r;
        c.push(next);
        peak = peak.max(next.abs());
        if next.abs() < 1e-24 * peak && r.abs() < 0.999 {
            // geometric tail bound with the current ratio
            return Ok((c, next.abs() * r.abs() / (1.0 - r.abs())));
        }
        k += 1;
        if k > KD_ORACLE_BUDGET {
            return Err(Error::BudgetExceeded("q-binomial series too long".into()));
        }
    }
    Ok((c, 0.0))
}

/// `K_d(k, ℓ)` by multiplying truncated q-binomial expansions of the four
/// q-Pochhammer factors and extracting coefficients directly.
pub fn kd_oracle(k: f64, l: f64, p: &ModelParams) -> Result<SeriesValue> {
    let (ki, li) = (half_integer(k)?, half_integer(l)?);
    let fd = Fd::new(p)?;
    // F_d = num(1/z) · inv_den(z), 1/F_d = den(w) · inv_num(1/w)
    let (num, e1) = qbinomial_series(fd.x, fd.q_col, fd.n, false)?;
    let (inv_den, e2) = qbinomial_series(fd.y, fd.q_row, fd.m, true)?;
    let (den, e3) = qbinomial_series(fd.y, fd.q_row, fd.m, false)?;
    let (inv_num, e4) = qbinomial_series(fd.x, fd.q_col, fd.n, true)?;
    let l1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
    // f_n = Σ_p num_p inv_den_{n+p}
    let f = |n: i64| -> f64 {
        let p0 = (-n).max(0) as usize;
        (p0..num.len()).map(|p| num[p] * inv_den.get((n + p as i64) as usize).copied().unwrap_or(0.0)).sum()
    };
    // g_n = Σ_s den_s inv_num_{s-n}
    let g = |n: i64| -> f64 {
        let s0 = n.max(0) as usize;
        (s0..den.len()).map(|s| den[s] * inv_num.get((s as i64 - n) as usize).copied().unwrap_or(0.0)).sum()
    };
    let m_max = (inv_den.len() as i64 - ki).min(inv_num.len() as i64 - li).max(0);
    let mut value = 0.0;
    let mut abs_sum = 0.0;
    for m in 0..m_max {
        let t = f(ki + m) * g(-li - m);
        value += t;
        abs_sum += t.abs();
    }
    let scale = (l1(&num) * l1(&den)).max(l1(&inv_den) * l1(&inv_num));
    let truncation_error = (e1 + e2 + e3 + e4) * scale * scale + abs_sum * 1e-16;
    Ok(SeriesValue { value, truncation_error })
}

// ---------------------------------------------------------------- K_he

/// Default tolerance of the `K_he` series.
pub const KHE_TOL: f64 = 1e-10;

/// Signed terms `(-1)^i x^{(α-1)/2 + η(i+1/2)} / (i! Γ(α/θ + η(i+1/2)/θ + 1/2))`
/// for one argument; the other argument swaps `(η, θ)`.
fn he_factors(x: f64, alpha: f64, eta: f64, theta: f64) -> Vec<f64> {
    let lx = x.ln();
    let mut out = Vec::new();
    let mut peak = f64::NEG_INFINITY;
    for i in 0..100_000usize {
        let s = i as f64 + 0.5;
        let a = alpha / theta + eta * s / theta + 0.5;
        let lt = (0.5 * (alpha - 1.0) + eta * s) * lx - ln_gamma(i as f64 + 1.0) - ln_gamma(a);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        out.push(sign * lt.exp());
        let prev = peak;
        peak = peak.max(lt);
        // log-terms are eventually concave; stop once far below the peak and falling
        if i > 0 && lt < prev && lt < peak - 48.0 {
            break;
        }
    }
    out
}

/// Per-point series factors reused across a Nyström matrix.
fn he_double_sum(xf: &[f64], yf: &[f64], alpha: f64, eta: f64, theta: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut abs = 0.0;
    for (i, &xi) in xf.iter().enumerate() {
        let base = alpha + eta * (i as f64 + 0.5);
        for (j, &yj) in yf.iter().enumerate() {
            let t = xi * yj / (base + theta * (j as f64 + 0.5));
            sum += t;
            abs += t.abs();
        }
    }
    (eta * theta * sum, eta * theta * abs)
}

fn check_he_params(alpha: f64, eta: f64, theta: f64) -> Result<()> {
    if !(alpha >= 0.0 && eta > 0.0 && theta > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("need alpha >= 0, eta, theta > 0 (got {alpha}, {eta}, {theta})")));
    }
    Ok(())
}

/// `K_he(x, y)` by the double power series
///
/// `ηθ Σ_{i,j} (-1)^{i+j} x^{(α-1)/2+η(i+1/2)} y^{(α-1)/2+θ(j+1/2)}
///  / (i! j! Γ(α/θ + η(i+1/2)/θ + 1/2) Γ(α/η + θ(j+1/2)/η + 1/2) (α + η(i+1/2) + θ(j+1/2)))`,
///
/// the residue expansion of the contour form. Fails when rounding in the
/// alternating sum could exceed `tol`.
pub fn khe_series(x: f64, y: f64, alpha: f64, eta: f64, theta: f64, tol: f64) -> Result<f64> {
    check_he_params(alpha, eta, theta)?;
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::InvalidInput(format!("K_he needs x, y > 0 (got {x}, {y})")));
    }
    let xf = he_factors(x, alpha, eta, theta);
    let yf = he_factors(y, alpha, theta, eta);
    let (sum, abs) = he_double_sum(&xf, &yf, alpha, eta, theta);
    if abs * 4.0 * f64::EPSILON > tol.max(tol * sum.abs()) {
        return Err(Error::NonConvergence(format!("K_he series cancels: Σ|terms| = {abs:e}, sum = {sum:e}")));
    }
    Ok(sum)
}

/// Quadrature nodes `(point, weight · direction)` on one wedge.
fn wedge_nodes(vertex: f64, angle: f64, length: f64, nodes: usize, opens_right: bool) -> Vec<(Complex64, Complex64)> {
    let per_panel = 16usize;
    let gl = GaussLegendre::new(per_panel);
    // panels grow geometrically from the vertex, whose distance to the
    // nearest pole is about |vertex| sin φ, up to the width set by `nodes`
    let h_max = length / (nodes / 2).div_ceil(per_panel).max(1) as f64;
    let mut h = (0.5 * vertex.abs() * angle.sin()).min(h_max);
    let mut out = Vec::new();
    // upward orientation: lower ray traversed inwards, upper ray outwards
    let (up, down) = if opens_right {
        (Complex64::from_polar(1.0, angle), Complex64::from_polar(1.0, -angle))
    } else {
        (Complex64::from_polar(1.0, PI - angle), Complex64::from_polar(1.0, -(PI - angle)))
    };
    let mut r0 = 0.0;
    while r0 < length {
        let r1 = (r0 + h).min(length);
        let (rs, ws) = gl.on(r0, r1);
        for (r, w) in rs.into_iter().zip(ws) {
            out.push((vertex + up * r, up * w));
            out.push((vertex + down * r, -down * w));
        }
        r0 = r1;
        h = (1.5 * h).min(h_max);
    }
    out
}

/// `(1/√(xy)) ∫∫ F(ζ)/F(ω) x^ζ y^{-ω} / (ζ - ω) dζ dω / (2πi)²` with `log F`
/// supplied, on wedges opening right (ζ) and left (ω).
fn wedge_double_integral(
    x: f64,
    y: f64,
    log_f: impl Fn(Complex64) -> Result<Complex64>,
    c: &ContourSpec,
) -> Result<(f64, f64)> {
    let ContourKind::Wedge { delta, angle, length } = c.kind else {
        return Err(Error::InvalidInput("wedge contour required".into()));
    };
    let zs = wedge_nodes(delta, angle, length, c.nodes, true);
    let ws = wedge_nodes(-delta, angle, length, c.nodes, false);
    let (lx, ly) = (x.ln(), y.ln());
    let a: Vec<(Complex64, Complex64)> =
        zs.iter().map(|&(z, dz)| Ok((z, (log_f(z)? + z * lx).exp() * dz))).collect::<Result<_>>()?;
    let b: Vec<(Complex64, Complex64)> =
        ws.iter().map(|&(w, dw)| Ok((w, (-log_f(w)? - w * ly).exp() * dw))).collect::<Result<_>>()?;
    // the integrand at the far ends bounds the truncation
    let tail = a.iter().rev().take(2).map(|t| t.1.norm()).fold(0.0, f64::max)
        + b.iter().rev().take(2).map(|t| t.1.norm()).fold(0.0, f64::max);
    let mut s = C_ZERO;
    for &(z, fa) in &a {
        for &(w, fb) in &b {
            s += fa * fb / (z - w);
        }
    }
    let s = s / (Complex64::new(0.0, 2.0 * PI).powi(2) * (x * y).sqrt());
    if s.im.abs() > 1e-8 * s.norm().max(1e-12) {
        return Err(Error::NonConvergence(format!("contour integral has imaginary part {}", s.im)));
    }
    Ok((s.re, tail))
}

/// Ray length at which `|F(ζ) x^ζ|` and `|y^{-ω}/F(ω)|` have dropped below
/// `1e-17` of their values at the vertices.
fn wedge_length(
    x: f64,
    y: f64,
    delta: f64,
    angle: f64,
    log_f: &impl Fn(Complex64) -> Result<Complex64>,
) -> Result<f64> {
    let (lx, ly) = (x.ln(), y.ln());
    let up = Complex64::from_polar(1.0, angle);
    let left = Complex64::from_polar(1.0, PI - angle);
    let za = (log_f(Complex64::new(delta, 0.0))? + delta * lx).re;
    let wa = (-log_f(Complex64::new(-delta, 0.0))? + delta * ly).re;
    let mut r = 1.0;
    while r < 5000.0 {
        let z = delta + up * r;
        let w = -delta + left * r;
        let zv = (log_f(z)? + z * lx).re;
        let wv = (-log_f(w)? - w * ly).re;
        if zv < za - 40.0 && wv < wa - 40.0 {
            return Ok(r * 1.2);
        }
        r *= 1.25;
    }
    Err(Error::NonConvergence("contour integrand does not decay along the wedge".into()))
}

/// Default wedge for `K_he`: vertex halfway to the first poles, 45° rays.
pub fn khe_default_contour(x: f64, y: f64, alpha: f64, eta: f64, theta: f64) -> Result<ContourSpec> {
    check_he_params(alpha, eta, theta)?;
    let delta = 0.5 * (0.5 * alpha + 0.5 * eta.min(theta));
    let log_f = |z: Complex64| log_f_he(z, alpha, eta, theta);
    let length = wedge_length(x, y, delta, PI / 4.0, &log_f)?;
    ContourSpec::wedge(delta, PI / 4.0, length, 32 * (length.ceil() as usize).max(8))
}

/// `log F_he(ζ) = log Γ(α/2η - ζ/η + 1/2) - log Γ(α/2θ + ζ/θ + 1/2)`.
fn log_f_he(z: Complex64, alpha: f64, eta: f64, theta: f64) -> Result<Complex64> {
    Ok(log_gamma(alpha / (2.0 * eta) - z / eta + 0.5)? - log_gamma(alpha / (2.0 * theta) + z / theta + 0.5)?)
}

/// Tail tolerance of [`khe_integral`].
pub const KHE_INTEGRAL_TAIL_TOL: f64 = 1e-10;

/// `K_he(x, y)` by quadrature of its double contour integral.
pub fn khe_integral(x: f64, y: f64, alpha: f64, eta: f64, theta: f64, c: &ContourSpec) -> Result<f64> {
    check_he_params(alpha, eta, theta)?;
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::InvalidInput(format!("K_he needs x, y > 0 (got {x}, {y})")));
    }
    if let ContourKind::Wedge { delta, .. } = c.kind {
        if delta >= 0.5 * (alpha + eta.min(theta)) {
            return Err(Error::Singularity(format!("vertex {delta} is not left of the first pole")));
        }
    }
    let (v, tail) = wedge_double_integral(x, y, |z| log_f_he(z, alpha, eta, theta), c)?;
    if tail > KHE_INTEGRAL_TAIL_TOL {
        return Err(Error::NonConvergence(format!("contour tail estimate {tail:e} exceeds tolerance")));
    }
    Ok(v)
}

/// `K̃_he(x, y) = e^{-x/2-y/2} K_he(e^{-x}, e^{-y})`; the Bessel closed form
/// is used when `η = θ = 1`.
pub fn khe_tilde(x: f64, y: f64, alpha: f64, eta: f64, theta: f64) -> Result<f64> {
    check_he_params(alpha, eta, theta)?;
    let damp = (-0.5 * (x + y)).exp();
    if eta == 1.0 && theta == 1.0 {
        return Ok(damp * bessel_kernel((-x).exp(), (-y).exp(), alpha)?);
    }
    Ok(damp * khe_series((-x).exp(), (-y).exp(), alpha, eta, theta, KHE_TOL)?)
}

/// `K̃_he` with per-node precomputation for Nyström matrices.
#[derive(Debug, Clone, Copy)]
pub struct KheTildeKernel {
    pub alpha: f64,
    pub eta: f64,
    pub theta: f64,
}

impl KheTildeKernel {
    pub fn new(alpha: f64, eta: f64, theta: f64) -> Result<Self> {
        check_he_params(alpha, eta, theta)?;
        Ok(Self { alpha, eta, theta })
    }

    fn is_bessel(&self) -> bool {
        self.eta == 1.0 && self.theta == 1.0
    }
}

impl KernelFn for KheTildeKernel {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        khe_tilde(x, y, self.alpha, self.eta, self.theta)
    }

    fn matrix(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let pts: Vec<f64> = xs.iter().map(|x| (-x).exp()).collect();
        let damp: Vec<f64> = pts.iter().map(|p| p.sqrt()).collect();
        let inner = if self.is_bessel() {
            BesselKernel::new(self.alpha)?.matrix(&pts)?
        } else {
            KheKernel::new(self.alpha, self.eta, self.theta)?.matrix(&pts)?
        };
        let n = xs.len();
        Ok((0..n * n).map(|k| damp[k / n] * inner[k] * damp[k % n]).collect())
    }
}

/// `K_he` on `(0, ∞)` by the series, with factors cached per node.
#[derive(Debug, Clone, Copy)]
pub struct KheKernel {
    pub alpha: f64,
    pub eta: f64,
    pub theta: f64,
}

impl KheKernel {
    pub fn new(alpha: f64, eta: f64, theta: f64) -> Result<Self> {
        check_he_params(alpha, eta, theta)?;
        Ok(Self { alpha, eta, theta })
    }
}

impl KernelFn for KheKernel {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        khe_series(x, y, self.alpha, self.eta, self.theta, KHE_TOL)
    }

    fn domain(&self) -> Domain {
        Domain::Interval(0.0, f64::INFINITY)
    }

    fn matrix(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let (a, e, t) = (self.alpha, self.eta, self.theta);
        let xf: Vec<Vec<f64>> = xs.par_iter().map(|&x| he_factors(x, a, e, t)).collect();
        let yf: Vec<Vec<f64>> = xs.par_iter().map(|&y| he_factors(y, a, t, e)).collect();
        let n = xs.len();
        let rows: Vec<Result<Vec<f64>>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let (s, abs) = he_double_sum(&xf[i], &yf[j], a, e, t);
                        if abs * 4.0 * f64::EPSILON > KHE_TOL.max(KHE_TOL * s.abs()) {
                            return Err(Error::NonConvergence(format!("K_he series cancels at ({}, {})", xs[i], xs[j])));
                        }
                        Ok(s)
                    })
                    .collect()
            })
            .collect();
        let mut out = Vec::with_capacity(n * n);
        for r in rows {
            out.extend(r?);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------- Bessel

/// Separation below which the closed form is replaced by its integral.
pub const BESSEL_NEAR_DIAGONAL: f64 = 1e-6;

/// `∫₀¹ J_α(2√(ux)) J_α(2√(uy)) du` by composite Gauss–Legendre.
pub fn bessel_kernel_integral(x: f64, y: f64, alpha: f64) -> f64 {
    // u = s² leaves the smooth integrand 2s^{1+2α}·(entire in s²)
    let gl = GaussLegendre::new(20);
    let panels = (2.0 * x.max(y).sqrt()).ceil() as usize + 4;
    gl.composite(0.0, 1.0, panels, |s| {
        2.0 * s * bessel_j_unchecked(alpha, 2.0 * s * x.sqrt()) * bessel_j_unchecked(alpha, 2.0 * s * y.sqrt())
    })
}

/// Hard-edge Bessel kernel `∫₀¹ J_α(2√(ux)) J_α(2√(uy)) du`.
///
/// With `u = 2√x`, `v = 2√y` the closed form is
/// `[u J_{α+1}(u) J_α(v) - v J_α(u) J_{α+1}(v)] / (2(x - y))`, and on the
/// diagonal `J_α(u)² - (2α/u) J_α(u) J_{α+1}(u) + J_{α+1}(u)²`.
pub fn bessel_kernel(x: f64, y: f64, alpha: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0 && alpha >= 0.0) {
        return Err(Error::ParameterOutOfRange(format!("Bessel kernel needs x, y, alpha >= 0 (got {x}, {y}, {alpha})")));
    }
    let jx = BesselNode::new(x, alpha);
    let jy = BesselNode::new(y, alpha);
    Ok(bessel_from_nodes(&jx, &jy, alpha))
}

/// `(x, 2√x, J_α(2√x), J_{α+1}(2√x))`.
#[derive(Debug, Clone, Copy)]
struct BesselNode {
    x: f64,
    u: f64,
    j: f64,
    j1: f64,
}

impl BesselNode {
    fn new(x: f64, alpha: f64) -> Self {
        let u = 2.0 * x.sqrt();
        Self { x, u, j: bessel_j_unchecked(alpha, u), j1: bessel_j_unchecked(alpha + 1.0, u) }
    }
}

fn bessel_from_nodes(a: &BesselNode, b: &BesselNode, alpha: f64) -> f64 {
    // fixed argument order makes the result exactly symmetric
    let (a, b) = if a.x >= b.x { (a, b) } else { (b, a) };
    let d = a.x - b.x;
    if d == 0.0 {
        let cross = if alpha == 0.0 || a.u == 0.0 { 0.0 } else { 2.0 * alpha / a.u * a.j * a.j1 };
        return a.j * a.j - cross + a.j1 * a.j1;
    }
    if d.abs() < BESSEL_NEAR_DIAGONAL {
        return bessel_kernel_integral(a.x, b.x, alpha);
    }
    (a.u * a.j1 * b.j - b.u * a.j * b.j1) / (2.0 * d)
}

#[derive(Debug, Clone, Copy)]
pub struct BesselKernel {
    pub alpha: f64,
}

impl BesselKernel {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::ParameterOutOfRange(format!("alpha must be >= 0, got {alpha}")));
        }
        Ok(Self { alpha })
    }
}

impl KernelFn for BesselKernel {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        bessel_kernel(x, y, self.alpha)
    }

    fn domain(&self) -> Domain {
        Domain::Interval(0.0, f64::INFINITY)
    }

    fn matrix(&self, xs: &[f64]) -> Result<Vec<f64>> {
        if xs.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::ParameterOutOfRange("Bessel kernel needs x >= 0".into()));
        }
        let nodes: Vec<BesselNode> = xs.par_iter().map(|&x| BesselNode::new(x, self.alpha)).collect();
        let n = xs.len();
        Ok((0..n * n).into_par_iter().map(|k| bessel_from_nodes(&nodes[k / n], &nodes[k % n], self.alpha)).collect())
    }
}

// ---------------------------------------------------------------- K_c

/// Finite-size kernel of the continuous ensemble as a residue sum.
///
/// With `ζ_m = α/2 + η(m+1/2)`, `ω_n = -α/2 - θ(n+1/2)`,
/// `A_m = α/θ + η(m+1/2)/θ + 1/2` and `B_n = α/η + θ(n+1/2)/η + 1/2`:
///
/// `K_c(x, y) = (ηθ/√(xy)) Σ_{m<M, n<N} (-1)^{m+n} (A_m)_N (B_n)_M x^{ζ_m} y^{-ω_n}
///  / (m! (M-1-m)! n! (N-1-n)! (ζ_m - ω_n))`.
#[derive(Debug, Clone)]
pub struct KcKernel {
    pub alpha: f64,
    pub eta: f64,
    pub theta: f64,
    pub m: usize,
    pub n: usize,
    zeta: Vec<f64>,
    omega: Vec<f64>,
    log_c: Vec<f64>,
    log_d: Vec<f64>,
}

/// `log (a)_n = log Γ(a+n) - log Γ(a)` for `a > 0`.
fn ln_poch(a: f64, n: usize) -> f64 {
    ln_gamma(a + n as f64) - ln_gamma(a)
}

impl KcKernel {
    pub fn new(alpha: f64, eta: f64, theta: f64, m: usize, n: usize) -> Result<Self> {
        check_he_params(alpha, eta, theta)?;
        if m == 0 || m > n {
            return Err(Error::ParameterOutOfRange(format!("need 1 <= M <= N, got M={m}, N={n}")));
        }
        let zeta: Vec<f64> = (0..m).map(|i| 0.5 * alpha + eta * (i as f64 + 0.5)).collect();
        let omega: Vec<f64> = (0..n).map(|j| -0.5 * alpha - theta * (j as f64 + 0.5)).collect();
        let log_c = (0..m)
            .map(|i| {
                let a = alpha / theta + eta * (i as f64 + 0.5) / theta + 0.5;
                ln_poch(a, n) - ln_gamma(i as f64 + 1.0) - ln_gamma((m - i) as f64)
            })
            .collect();
        let log_d = (0..n)
            .map(|j| {
                let b = alpha / eta + theta * (j as f64 + 0.5) / eta + 0.5;
                ln_poch(b, m) - ln_gamma(j as f64 + 1.0) - ln_gamma((n - j) as f64)
            })
            .collect();
        Ok(Self { alpha, eta, theta, m, n, zeta, omega, log_c, log_d })
    }

    /// Signed terms `(-1)^m C_m x^{ζ_m - 1/2}` of one argument.
    fn x_terms(&self, x: f64) -> Vec<f64> {
        let lx = x.ln();
        self.zeta
            .iter()
            .zip(&self.log_c)
            .enumerate()
            .map(|(i, (z, c))| if i % 2 == 0 { 1.0 } else { -1.0 } * (c + (z - 0.5) * lx).exp())
            .collect()
    }

    fn y_terms(&self, y: f64) -> Vec<f64> {
        let ly = y.ln();
        self.omega
            .iter()
            .zip(&self.log_d)
            .enumerate()
            .map(|(j, (w, d))| if j % 2 == 0 { 1.0 } else { -1.0 } * (d + (-w - 0.5) * ly).exp())
            .collect()
    }

    fn combine(&self, xt: &[f64], yt: &[f64]) -> (f64, f64) {
        let mut s = 0.0;
        let mut abs = 0.0;
        for (z, a) in self.zeta.iter().zip(xt) {
            for (w, b) in self.omega.iter().zip(yt) {
                let t = a * b / (z - w);
                s += t;
                abs += t.abs();
            }
        }
        (self.eta * self.theta * s, self.eta * self.theta * abs)
    }

    fn check_arg(x: f64) -> Result<()> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::InvalidInput(format!("K_c arguments must lie in (0,1), got {x}")));
        }
        Ok(())
    }
}

/// Relative rounding tolerance of the residue sum.
pub const KC_CANCELLATION_TOL: f64 = 1e-8;

impl KernelFn for KcKernel {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Self::check_arg(x)?;
        Self::check_arg(y)?;
        let (s, abs) = self.combine(&self.x_terms(x), &self.y_terms(y));
        if abs * 4.0 * f64::EPSILON > KC_CANCELLATION_TOL * s.abs().max(1.0) {
            return Err(Error::NonConvergence(format!("K_c residue sum cancels at ({x}, {y})")));
        }
        Ok(s)
    }

    fn domain(&self) -> Domain {
        Domain::Interval(0.0, 1.0)
    }

    fn matrix(&self, xs: &[f64]) -> Result<Vec<f64>> {
        for &x in xs {
            Self::check_arg(x)?;
        }
        let xt: Vec<Vec<f64>> = xs.iter().map(|&x| self.x_terms(x)).collect();
        let yt: Vec<Vec<f64>> = xs.iter().map(|&y| self.y_terms(y)).collect();
        let n = xs.len();
        let vals: Vec<(f64, f64)> = (0..n * n).into_par_iter().map(|k| self.combine(&xt[k / n], &yt[k % n])).collect();
        let mut out = Vec::with_capacity(n * n);
        for (s, abs) in vals {
            if abs * 4.0 * f64::EPSILON > KC_CANCELLATION_TOL * s.abs().max(1.0) {
                return Err(Error::NonConvergence("K_c residue sum cancels".into()));
            }
            out.push(s);
        }
        Ok(out)
    }
}

pub fn kc_eval(x: f64, y: f64, alpha: f64, eta: f64, theta: f64, m: usize, n: usize) -> Result<f64> {
    KcKernel::new(alpha, eta, theta, m, n)?.eval(x, y)
}

/// `log F_c(ζ) = log (α/2θ + ζ/θ + 1/2)_N - log (α/2η - ζ/η + 1/2)_M`.
fn log_f_c(z: Complex64, alpha: f64, eta: f64, theta: f64, m: usize, n: usize) -> Result<Complex64> {
    let a = alpha / (2.0 * theta) + z / theta + 0.5;
    let b = alpha / (2.0 * eta) - z / eta + 0.5;
    let num = log_gamma(a + n as f64)? - log_gamma(a)?;
    let den = log_gamma(b + m as f64)? - log_gamma(b)?;
    Ok(num - den)
}

/// `K_c(x, y)` by quadrature of its double contour integral over wedges.
pub fn kc_quadrature(x: f64, y: f64, alpha: f64, eta: f64, theta: f64, m: usize, n: usize) -> Result<f64> {
    check_he_params(alpha, eta, theta)?;
    KcKernel::check_arg(x)?;
    KcKernel::check_arg(y)?;
    let delta = 0.5 * (0.5 * alpha + 0.5 * eta.min(theta));
    let log_f = |z: Complex64| log_f_c(z, alpha, eta, theta, m, n);
    let length = wedge_length(x, y, delta, PI / 4.0, &log_f)?;
    let c = ContourSpec::wedge(delta, PI / 4.0, length, 16 * (length.ceil() as usize).max(8))?;
    Ok(wedge_double_integral(x, y, log_f, &c)?.0)
}

// ---------------------------------------------------------------- Airy

/// `(Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y)`, on the diagonal `Ai'(x)² - x Ai(x)²`.
pub fn airy_kernel(x: f64, y: f64) -> Result<f64> {
    let (ax, apx) = airy(x)?;
    let (ay, apy) = airy(y)?;
    Ok(airy_from_values(x, ax, apx, y, ay, apy))
}

fn airy_from_values(x: f64, ax: f64, apx: f64, y: f64, ay: f64, apy: f64) -> f64 {
    if x == y {
        return apx * apx - x * ax * ax;
    }
    if (x - y).abs() < 1e-7 {
        // symmetric in (x, y), so the midpoint diagonal is off by O((x-y)²)
        let m = 0.5 * (x + y);
        let (am, apm) = airy_unchecked(m);
        return apm * apm - m * am * am;
    }
    (ax * apy - apx * ay) / (x - y)
}

/// Airy kernel for Fredholm matrices: above the validated range `Ai` is
/// below `1e-48` and the kernel is taken as zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct AiryKernel;

impl AiryKernel {
    fn values(x: f64) -> Result<(f64, f64)> {
        if x > AIRY_RANGE.1 {
            return Ok((0.0, 0.0));
        }
        airy(x)
    }
}

impl KernelFn for AiryKernel {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let (ax, apx) = Self::values(x)?;
        let (ay, apy) = Self::values(y)?;
        Ok(airy_from_values(x, ax, apx, y, ay, apy))
    }

    fn matrix(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let vals: Vec<(f64, f64)> = xs.iter().map(|&x| Self::values(x)).collect::<Result<_>>()?;
        let n = xs.len();
        Ok((0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                airy_from_values(xs[i], vals[i].0, vals[i].1, xs[j], vals[j].0, vals[j].1)
            })
            .collect())
    }
}

/// Airy kernel from its contour form on `Re ζ = δ`, `Re ω = -δ`, by the
/// trapezoidal rule on `[-T, T]²`.
pub fn airy_contour(x: f64, y: f64, c: &ContourSpec) -> Result<f64> {
    let ContourKind::VerticalLine { delta, half_height } = c.kind else {
        return Err(Error::InvalidInput("vertical-line contour required".into()));
    };
    let n = c.nodes;
    let h = 2.0 * half_height / n as f64;
    let pts: Vec<f64> = (0..=n).map(|k| -half_height + k as f64 * h).collect();
    let zs: Vec<(Complex64, Complex64)> = pts
        .iter()
        .map(|&t| {
            let z = Complex64::new(delta, t);
            (z, (-x * z + z * z * z / 3.0).exp())
        })
        .collect();
    let ws: Vec<(Complex64, Complex64)> = pts
        .iter()
        .map(|&t| {
            let w = Complex64::new(-delta, t);
            (w, (y * w - w * w * w / 3.0).exp())
        })
        .collect();
    let s: Complex64 = zs
        .par_iter()
        .map(|&(z, fz)| ws.iter().map(|&(w, fw)| fz * fw / (z - w)).sum::<Complex64>())
        .sum();
    // dζ dω = (i dt)(i ds) and 1/(2πi)² = -1/(4π²)
    let v = s * h * h / (4.0 * PI * PI);
    if v.im.abs() > 1e-10 * v.norm().max(1e-12) {
        return Err(Error::NonConvergence(format!("Airy contour has imaginary part {}", v.im)));
    }
    Ok(v.re)
}

/// Shared handle for kernels passed across threads.
pub type SharedKernel = Arc<dyn KernelFn + Send>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_j;

    fn geo_inf(a: f64, q: f64) -> ModelParams {
        ModelParams::geometric(a, q, 1.0, 1.0).unwrap()
    }

    #[test]
    fn contour_validation() {
        assert!(ContourSpec::circle(1.1, 15).is_err());
        assert!(ContourSpec::circle(1.1, 14).is_err());
        assert!(ContourSpec::circle(-1.0, 64).is_err());
        assert!(ContourSpec::circle(1.1, 64).is_ok());
        assert!(ContourSpec::wedge(0.1, 2.0, 10.0, 64).is_err());
    }

    #[test]
    fn kd_vacuum_indicator() {
        let p = geo_inf(0.0, 0.5);
        let k = KdKernel::new(&p).unwrap();
        for ki in -4..4 {
            for li in -4..4 {
                let (kf, lf) = (ki as f64 + 0.5, li as f64 + 0.5);
                let expect = if ki == li && kf < 0.0 { 1.0 } else { 0.0 };
                assert!((k.eval(kf, lf).unwrap() - expect).abs() < 1e-14, "({kf},{lf})");
                assert!((kd_oracle(kf, lf, &p).unwrap().value - expect).abs() < 1e-14);
            }
        }
        assert!(k.eval(0.0, 0.5).is_err());
    }

    #[test]
    fn kd_matches_series_oracle() {
        for p in [
            geo_inf(0.9, 0.4),
            ModelParams::geometric(0.7, 0.5, 1.0, 2.0).unwrap(),
            ModelParams { m: Extent::Finite(2), n: Extent::Finite(3), ..ModelParams::geometric(0.8, 0.6, 1.0, 1.5).unwrap() },
        ] {
            let kern = KdKernel::new(&p).unwrap();
            assert!(kern.imag_residue < KD_IMAG_TOL);
            for ki in -3..=4 {
                for li in -3..=4 {
                    let (k, l) = (ki as f64 - 0.5, li as f64 - 0.5);
                    let a = kern.eval(k, l).unwrap();
                    let o = kd_oracle(k, l, &p).unwrap();
                    assert!(o.truncation_error < 1e-12);
                    assert!((a - o.value).abs() < 1e-10, "{p:?} ({k},{l}): {a} vs {}", o.value);
                }
            }
        }
    }

    #[test]
    fn kd_lattice_matrix_matches_pointwise() {
        let k = KdKernel::new(&geo_inf(0.9, 0.4)).unwrap();
        let xs: Vec<f64> = (0..12).map(|i| i as f64 - 3.5).collect();
        let m = k.matrix(&xs).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in xs.iter().enumerate() {
                assert!((m[i * 12 + j] - k.eval(x, y).unwrap()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn kd_node_doubling() {
        let p = geo_inf(0.9, 0.4);
        let c = KdKernel::default_contour(&p).unwrap();
        let ContourKind::Circle { radius } = c.kind else { unreachable!() };
        let c2 = ContourSpec::circle(radius, 2 * c.nodes).unwrap();
        for (k, l) in [(0.5, 0.5), (-1.5, 2.5), (3.5, -0.5)] {
            let a = kd_eval(k, l, &p, &c).unwrap();
            let b = kd_eval(k, l, &p, &c2).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        // a circle through the pole at 1/(√a Q^{1/2}) is rejected
        let bad = ContourSpec::circle(1.0 / (0.9f64.sqrt() * 0.4f64.sqrt()), 64).unwrap();
        assert!(matches!(kd_eval(0.5, 0.5, &p, &bad), Err(Error::Singularity(_))));
    }

    #[test]
    fn khe_series_equals_bessel_at_unit_exponents() {
        for alpha in [0.0, 0.5, 2.0] {
            for i in 1..=5 {
                for j in 1..=5 {
                    let (x, y) = (0.8 * i as f64, 0.8 * j as f64);
                    let s = khe_series(x, y, alpha, 1.0, 1.0, KHE_TOL).unwrap();
                    let b = bessel_kernel(x, y, alpha).unwrap();
                    assert!((s - b).abs() < 1e-8, "alpha={alpha} ({x},{y}): {s} vs {b}");
                }
            }
        }
    }

    #[test]
    fn khe_series_vanishes_at_the_hard_edge() {
        let a = khe_series(1e-6, 0.5, 1.5, 1.0, 2.0, KHE_TOL).unwrap().abs();
        let b = khe_series(1e-9, 0.5, 1.5, 1.0, 2.0, KHE_TOL).unwrap().abs();
        assert!(b < a && b < 1e-3);
    }

    #[test]
    fn khe_series_matches_contour_integral() {
        for (x, y, alpha, eta, theta) in
            [(0.3, 0.7, 0.5, 1.0, 2.0), (0.5, 0.5, 1.0, 2.0, 1.0), (0.2, 0.9, 0.0, 1.0, 1.0), (1.5, 0.4, 2.0, 0.5, 1.5)]
        {
            let c = khe_default_contour(x, y, alpha, eta, theta).unwrap();
            let i = khe_integral(x, y, alpha, eta, theta, &c).unwrap();
            let s = khe_series(x, y, alpha, eta, theta, KHE_TOL).unwrap();
            assert!((i - s).abs() < 1e-5, "({x},{y},{alpha},{eta},{theta}): {i} vs {s}");
        }
    }

    #[test]
    fn khe_tilde_properties() {
        let (a, e) = (0.7, 1.5);
        for (x, y) in [(0.1, 0.9), (-0.5, 1.2)] {
            let u = khe_tilde(x, y, a, e, e).unwrap();
            let v = khe_tilde(y, x, a, e, e).unwrap();
            assert!((u - v).abs() < 1e-12 * u.abs().max(1e-300));
        }
        let k0 = khe_tilde(0.0, 0.0, a, 1.0, 2.0).unwrap();
        assert!((k0 - khe_series(1.0, 1.0, a, 1.0, 2.0, KHE_TOL).unwrap()).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for k in 0..12 {
            let x = 1.0 + k as f64;
            let d = khe_tilde(x, x, a, 1.0, 2.0).unwrap();
            assert!(d > 0.0 && d < prev);
            prev = d;
        }
    }

    #[test]
    fn bessel_forms_agree() {
        let a = bessel_kernel(1.0, 2.0, 0.0).unwrap();
        let b = bessel_kernel_integral(1.0, 2.0, 0.0);
        assert!((a - b).abs() < 1e-10);
        for alpha in [0.0, 0.5, 3.0] {
            for x in [0.0, 0.3, 2.0, 9.0, 30.0] {
                let d = bessel_kernel(x, x, alpha).unwrap();
                assert!((d - bessel_kernel_integral(x, x, alpha)).abs() < 1e-8, "alpha={alpha} x={x}");
                let near = bessel_kernel(x + 2e-7, x, alpha).unwrap();
                assert!((near - d).abs() < 1e-6);
            }
            assert_eq!(bessel_kernel(0.7, 1.9, alpha).unwrap(), bessel_kernel(1.9, 0.7, alpha).unwrap());
        }
        // J' form written out with the library derivative
        let (x, y, al) = (0.6f64, 1.7f64, 1.5);
        let (u, v) = (2.0 * x.sqrt(), 2.0 * y.sqrt());
        let jp = |t: f64| crate::specfun::bessel_j_prime(al, t).unwrap();
        let j = |t: f64| bessel_j(al, t).unwrap();
        let direct = (j(u) * v * jp(v) - u * jp(u) * j(v)) / (2.0 * (x - y));
        assert!((direct - bessel_kernel(x, y, al).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn bessel_matrix_matches_pointwise() {
        let k = BesselKernel::new(1.5).unwrap();
        let xs = [0.1, 0.5, 2.0, 2.0 + 5e-7];
        let m = k.matrix(&xs).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m[i * 4 + j], k.eval(xs[i], xs[j]).unwrap());
            }
        }
    }

    #[test]
    fn kc_residue_matches_quadrature() {
        for (alpha, eta, theta, m, n) in [(0.0, 1.0, 1.0, 1, 1), (0.5, 1.0, 2.0, 2, 3), (1.0, 2.0, 0.5, 3, 3)] {
            for x in [0.2, 0.5, 0.8] {
                for y in [0.3, 0.6] {
                    let r = kc_eval(x, y, alpha, eta, theta, m, n).unwrap();
                    let q = kc_quadrature(x, y, alpha, eta, theta, m, n)
                        .unwrap_or_else(|e| panic!("({alpha},{eta},{theta},{m},{n}) at ({x},{y}): {e}"));
                    assert!((r - q).abs() < 1e-6, "({alpha},{eta},{theta},{m},{n}) at ({x},{y}): {r} vs {q}");
                }
            }
        }
        assert!(kc_eval(1.2, 0.5, 0.0, 1.0, 1.0, 1, 1).is_err());
        assert!(kc_eval(0.2, 0.5, 0.0, 1.0, 1.0, 3, 2).is_err());
    }

    #[test]
    fn kc_single_site_is_power_density() {
        // M = N = 1: one point with density β x^{β-1}, β = α + η/2 + θ/2
        let (alpha, eta, theta) = (0.5, 1.0, 2.0);
        let beta: f64 = alpha + 0.5 * eta + 0.5 * theta;
        for x in [0.1, 0.4, 0.9] {
            let k = kc_eval(x, x, alpha, eta, theta, 1, 1).unwrap();
            assert!((k - beta * x.powf(beta - 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn kc_scales_to_hard_edge() {
        let (alpha, eta, theta) = (0.5, 1.0, 2.0);
        let (x, y) = (0.5, 1.0);
        let target = khe_series(x, y, alpha, eta, theta, KHE_TOL).unwrap();
        let errs: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&m| {
                let s = (m as f64).powf(-1.0 / eta) * (m as f64).powf(-1.0 / theta);
                (s * kc_eval(x * s, y * s, alpha, eta, theta, m, m).unwrap() - target).abs()
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn airy_closed_form_matches_contour() {
        let c = ContourSpec::vertical_line(1.0, 8.0, 640).unwrap();
        for (x, y) in [(0.0, 1.0), (-2.0, 0.5), (1.5, 1.5), (-1.0, -3.0)] {
            let a = airy_kernel(x, y).unwrap();
            let b = airy_contour(x, y, &c).unwrap();
            assert!((a - b).abs() < 1e-6, "({x},{y}): {a} vs {b}");
        }
        let (_, aip0) = airy(0.0).unwrap();
        assert!((airy_kernel(0.0, 0.0).unwrap() - aip0 * aip0).abs() < 1e-16);
        assert_eq!(airy_kernel(0.3, -0.8).unwrap(), airy_kernel(-0.8, 0.3).unwrap());
        assert!(airy_kernel(40.0, 0.0).is_err());
        assert_eq!(AiryKernel.eval(40.0, 0.0).unwrap(), 0.0);
    }
}
