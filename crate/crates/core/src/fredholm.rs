//! Fredholm determinants `det(1 - K)`.
//!
//! Continuous kernels are discretised by Nyström on Gauss–Legendre nodes
//! with the symmetric weighting `√w_i K(x_i, x_j) √w_j`; half-line domains
//! are mapped onto `(0, 1)` by `x = s - c·log(1 - t)`. Discrete kernels are
//! truncated to a finite block of the lattice. Determinants are accumulated
//! as log-magnitude and sign.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelFn;
use crate::quad::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FredholmResult {
    pub value: f64,
    /// Nonnegative error estimate: node-doubling difference or tail trace.
    pub est_error: f64,
    /// Quadrature nodes or lattice truncation used for `value`.
    pub nodes: usize,
}

/// Slack allowed outside `[0, 1]` before a probability is rejected.
pub const PROBABILITY_SLACK: f64 = 1e-8;

impl FredholmResult {
    /// The value clamped to `[0, 1]`; values further than
    /// [`PROBABILITY_SLACK`] outside are a numerical failure.
    pub fn probability(&self) -> Result<f64> {
        if !(self.value >= -PROBABILITY_SLACK && self.value <= 1.0 + PROBABILITY_SLACK) {
            return Err(Error::NonConvergence(format!("determinant {} is not a probability", self.value)));
        }
        Ok(self.value.clamp(0.0, 1.0))
    }
}

/// `(log |det A|, sign det A)` by LU with partial pivoting; `a` is row-major
/// `n × n` and is overwritten.
pub fn log_det(a: &mut [f64], n: usize) -> (f64, f64) {
    assert_eq!(a.len(), n * n);
    let mut log_abs = 0.0;
    let mut sign = 1.0;
    for c in 0..n {
        let (mut piv, mut best) = (c, a[c * n + c].abs());
        for r in c + 1..n {
            let v = a[r * n + c].abs();
            if v > best {
                piv = r;
                best = v;
            }
        }
        if best == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        if piv != c {
            for k in 0..n {
                a.swap(c * n + k, piv * n + k);
            }
            sign = -sign;
        }
        let d = a[c * n + c];
        log_abs += d.abs().ln();
        if d < 0.0 {
            sign = -sign;
        }
        for r in c + 1..n {
            let f = a[r * n + c] / d;
            if f != 0.0 {
                for k in c + 1..n {
                    a[r * n + k] -= f * a[c * n + k];
                }
            }
        }
    }
    (log_abs, sign)
}

/// `det(I - G)` for a row-major `n × n` matrix `G`.
pub fn det_identity_minus(g: &[f64], n: usize) -> f64 {
    let mut a: Vec<f64> = g.iter().map(|v| -v).collect();
    for i in 0..n {
        a[i * n + i] += 1.0;
    }
    let (l, s) = log_det(&mut a, n);
    s * l.exp()
}

/// Integration domain with its Nyström rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadDomain {
    Interval(f64, f64),
    /// `(s, ∞)` through `x = s - scale·log(1 - t)`.
    HalfLine { s: f64, scale: f64 },
}

impl QuadDomain {
    /// Nodes and weights of the `n`-point rule.
    pub fn rule(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let gl = GaussLegendre::new(n);
        match *self {
            QuadDomain::Interval(a, b) => gl.on(a, b),
            QuadDomain::HalfLine { s, scale } => {
                let (ts, ws) = gl.on(0.0, 1.0);
                let xs = ts.iter().map(|t| s - scale * (-t).ln_1p()).collect();
                let ws = ts.iter().zip(ws).map(|(t, w)| w * scale / (1.0 - t)).collect();
                (xs, ws)
            }
        }
    }
}

fn nystrom(k: &impl KernelFn, dom: QuadDomain, n: usize) -> Result<f64> {
    let (xs, ws) = dom.rule(n);
    let mut g = k.matrix(&xs)?;
    let sw: Vec<f64> = ws.iter().map(|w| w.sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] *= sw[i] * sw[j];
        }
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence("non-finite kernel matrix entry".into()));
    }
    Ok(det_identity_minus(&g, n))
}

fn doubled(k: &impl KernelFn, dom: QuadDomain, n: usize) -> Result<FredholmResult> {
    if n < 8 {
        return Err(Error::InvalidInput(format!("Nyström needs at least 8 nodes, got {n}")));
    }
    let coarse = nystrom(k, dom, n)?;
    let fine = nystrom(k, dom, 2 * n)?;
    Ok(FredholmResult { value: fine, est_error: (fine - coarse).abs(), nodes: 2 * n })
}

/// `det(1 - K)` on `L²(a, b)`; `value` uses `2n` nodes and `est_error` is its
/// difference from the `n`-node value.
pub fn fdet_interval(k: &impl KernelFn, a: f64, b: f64, n: usize) -> Result<FredholmResult> {
    if !(a < b && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!("invalid interval ({a}, {b})")));
    }
    doubled(k, QuadDomain::Interval(a, b), n)
}

/// Doubles the node count from `n0` until consecutive values agree to `tol`.
pub fn fdet_interval_adaptive(k: &impl KernelFn, a: f64, b: f64, n0: usize, tol: f64, n_max: usize) -> Result<FredholmResult> {
    let mut n = n0;
    loop {
        let r = fdet_interval(k, a, b, n)?;
        if r.est_error <= tol {
            return Ok(r);
        }
        n *= 2;
        if 2 * n > n_max {
            return Err(Error::NonConvergence(format!(
                "Fredholm determinant on ({a}, {b}) changed by {:e} at {} nodes",
                r.est_error, r.nodes
            )));
        }
    }
}

/// Ratio of the diagonal 40 map-scales out to its value at `s` that counts
/// as decayed.
pub const HALF_LINE_DECAY: f64 = 1e-10;

/// `det(1 - K)` on `L²(s, ∞)` through `x = s - map_scale·log(1 - t)`.
pub fn fdet_semiinfinite(k: &impl KernelFn, s: f64, map_scale: f64, n: usize) -> Result<FredholmResult> {
    if !(map_scale > 0.0 && s.is_finite()) {
        return Err(Error::InvalidInput(format!("invalid half-line map (s = {s}, scale = {map_scale})")));
    }
    let far = k.eval(s + 40.0 * map_scale, s + 40.0 * map_scale)?.abs();
    let near = k.eval(s, s)?.abs();
    if far > HALF_LINE_DECAY * near.max(1.0) {
        return Err(Error::NonConvergence(format!("kernel diagonal {far:e} has not decayed 40 map-scales past s = {s}")));
    }
    doubled(k, QuadDomain::HalfLine { s, scale: map_scale }, n)
}

/// Largest `n_quad^{m_max}` [`fdet_series_oracle`] will sum.
pub const SERIES_ORACLE_BUDGET: f64 = 2e8;

/// `Σ_{m ≤ m_max} (-1)^m/m! ∫…∫ det[K(x_i, x_j)]` with every integral taken
/// by the same `n_quad`-point rule.
pub fn fdet_series_oracle(k: &impl KernelFn, dom: QuadDomain, m_max: usize, n_quad: usize) -> Result<f64> {
    if m_max > 4 {
        return Err(Error::InvalidInput(format!("series oracle supports m_max <= 4, got {m_max}")));
    }
    if (n_quad as f64).powi(m_max as i32) > SERIES_ORACLE_BUDGET {
        return Err(Error::BudgetExceeded(format!("{n_quad}^{m_max} quadrature tuples")));
    }
    let (xs, ws) = dom.rule(n_quad);
    let kmat = k.matrix(&xs)?;
    let mut total = 1.0;
    let mut fact = 1.0;
    let mut idx = vec![0usize; m_max];
    for m in 1..=m_max {
        fact *= m as f64;
        let mut sum = 0.0;
        idx[..m].fill(0);
        'tuples: loop {
            let mut minor = vec![0.0; m * m];
            let mut w = 1.0;
            for (r, &i) in idx[..m].iter().enumerate() {
                w *= ws[i];
                for (c, &j) in idx[..m].iter().enumerate() {
                    minor[r * m + c] = kmat[i * n_quad + j];
                }
            }
            let (l, s) = log_det(&mut minor, m);
            sum += w * s * l.exp();
            for d in (0..m).rev() {
                idx[d] += 1;
                if idx[d] < n_quad {
                    continue 'tuples;
                }
                idx[d] = 0;
            }
            break;
        }
        total += if m % 2 == 1 { -sum } else { sum } / fact;
    }
    Ok(total)
}

/// Pullback of `K` on `(0, r)` to `(0, 1)` by `x = r t^p`:
/// `√(φ'(t) φ'(u)) K(φ(t), φ(u))`. The determinant is unchanged, and a
/// kernel behaving like `x^e` at 0 becomes `t^{pe + (p-1)/2}`, smooth for
/// suitable `p`.
pub struct MappedKernel<K> {
    pub inner: K,
    pub r: f64,
    pub p: f64,
}

impl<K: KernelFn> MappedKernel<K> {
    fn phi(&self, t: f64) -> (f64, f64) {
        (self.r * t.powf(self.p), self.r * self.p * t.powf(self.p - 1.0))
    }
}

impl<K: KernelFn> KernelFn for MappedKernel<K> {
    fn eval(&self, t: f64, u: f64) -> Result<f64> {
        let ((x, dx), (y, dy)) = (self.phi(t), self.phi(u));
        Ok((dx * dy).sqrt() * self.inner.eval(x, y)?)
    }

    fn matrix(&self, ts: &[f64]) -> Result<Vec<f64>> {
        let (xs, ds): (Vec<f64>, Vec<f64>) = ts.iter().map(|&t| self.phi(t)).unzip();
        let mut m = self.inner.matrix(&xs)?;
        let n = ts.len();
        let sd: Vec<f64> = ds.iter().map(|d| d.sqrt()).collect();
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] *= sd[i] * sd[j];
            }
        }
        Ok(m)
    }
}

/// Gap probability `det(1 - K)` on `L²(0, r)` for a kernel with an
/// algebraic singularity at 0, via [`MappedKernel`] with exponent `p`.
pub fn fdet_gap_from_zero<K: KernelFn>(k: K, r: f64, p: f64, n: usize) -> Result<FredholmResult> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("gap length must be positive, got {r}")));
    }
    fdet_interval(&MappedKernel { inner: k, r, p }, 0.0, 1.0, n)
}

/// `(|K| at the cutoff, Σ |K(j, j)| over the tail)`. Summation stops once
/// the terms are below `1e-3` of the running sum and decaying geometrically;
/// the remainder is then bounded by the geometric series of the last ratio,
/// so the sum is an upper bound rather than a partial sum.
fn tail_trace(k: &impl KernelFn, first: f64, tol: f64) -> Result<(f64, f64)> {
    let mut sum = 0.0;
    let mut at_cut = 0.0;
    let mut prev = 0.0;
    for m in 0..10_000 {
        let x = first + m as f64;
        let d = k.eval(x, x)?.abs();
        if m == 0 {
            at_cut = d;
            if d >= tol {
                // the caller rejects this truncation
                return Ok((at_cut, d));
            }
        }
        sum += d;
        if d == 0.0 {
            return Ok((at_cut, sum));
        }
        if m > 4 && d <= 1e-3 * sum {
            let r = d / prev;
            if r < 1.0 {
                return Ok((at_cut, sum + d * r / (1.0 - r)));
            }
        }
        prev = d;
    }
    Err(Error::NonConvergentTail(format!("kernel diagonal past {first} is not summable within 10000 sites")))
}

/// `det(1 - K)` on `ℓ²{l+1/2, l+3/2, …}` truncated to `T` sites; the error
/// estimate is the tail trace `Σ_{m>T} |K(l+m-1/2, l+m-1/2)|`.
pub fn fdet_discrete(k: &impl KernelFn, l: i64, t: usize, tol: f64) -> Result<FredholmResult> {
    if t == 0 {
        return Err(Error::InvalidInput("truncation must be positive".into()));
    }
    let pts: Vec<f64> = (0..t).map(|m| l as f64 + m as f64 + 0.5).collect();
    let (at_cut, tail) = tail_trace(k, l as f64 + t as f64 + 0.5, tol)?;
    if at_cut >= tol {
        return Err(Error::NonConvergentTail(format!(
            "|K| = {at_cut:e} at truncation {t} exceeds tolerance {tol:e}"
        )));
    }
    let g = k.matrix(&pts)?;
    Ok(FredholmResult { value: det_identity_minus(&g, t), est_error: tail, nodes: t })
}

/// `P(L ≤ l) = det(1 - K)` on `ℓ²{l+1/2, …}` for every `l` in
/// `l_min..=l_max`, from trailing blocks of one matrix whose last site is
/// `l_max + T - 1/2`.
pub fn discrete_gap_probabilities(k: &impl KernelFn, l_min: i64, l_max: i64, t: usize, tol: f64) -> Result<Vec<FredholmResult>> {
    if l_max < l_min || t == 0 {
        return Err(Error::InvalidInput(format!("invalid range {l_min}..={l_max} with truncation {t}")));
    }
    let size = (l_max - l_min) as usize + t;
    let pts: Vec<f64> = (0..size).map(|m| l_min as f64 + m as f64 + 0.5).collect();
    let (at_cut, tail) = tail_trace(k, l_min as f64 + size as f64 + 0.5, tol)?;
    if at_cut >= tol {
        return Err(Error::NonConvergentTail(format!("|K| = {at_cut:e} at the truncation exceeds {tol:e}")));
    }
    let g = k.matrix(&pts)?;
    (l_min..=l_max)
        .into_par_iter()
        .map(|l| {
            let off = (l - l_min) as usize;
            let n = size - off;
            let sub: Vec<f64> = (off..size).flat_map(|i| (off..size).map(move |j| (i, j))).map(|(i, j)| g[i * size + j]).collect();
            Ok(FredholmResult { value: det_identity_minus(&sub, n), est_error: tail, nodes: n })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{BesselKernel, FnKernel};

    #[test]
    fn lu_matches_small_determinants() {
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        let (l, s) = log_det(&mut a, 2);
        assert!((s * l.exp() - 5.0).abs() < 1e-14);
        let mut b = vec![0.0, 1.0, 1.0, 0.0];
        let (l, s) = log_det(&mut b, 2);
        assert_eq!((s, l.exp()), (-1.0, 1.0));
        let mut z = vec![1.0, 2.0, 2.0, 4.0];
        assert_eq!(log_det(&mut z, 2).1, 0.0);
    }

    #[test]
    fn trivial_kernels() {
        let zero = FnKernel(|_, _| 0.0);
        assert_eq!(fdet_interval(&zero, 0.0, 1.0, 8).unwrap().value, 1.0);
        assert_eq!(fdet_semiinfinite(&zero, 0.0, 1.0, 8).unwrap().value, 1.0);
        assert_eq!(fdet_discrete(&zero, 0, 5, 1e-12).unwrap().value, 1.0);
        assert_eq!(fdet_series_oracle(&zero, QuadDomain::Interval(0.0, 1.0), 3, 10).unwrap(), 1.0);
        let one = FnKernel(|_, _| 1.0);
        assert!(fdet_interval(&one, 0.0, 1.0, 8).unwrap().value.abs() < 1e-14);
        let sqrt = FnKernel(|x: f64, y: f64| (x * y).sqrt());
        assert!((fdet_interval(&sqrt, 0.0, 1.0, 8).unwrap().value - 0.5).abs() < 1e-14);
        let s = fdet_series_oracle(&sqrt, QuadDomain::Interval(0.0, 1.0), 4, 12).unwrap();
        assert!((s - 0.5).abs() < 1e-10);
        let c = 0.3;
        let rank1 = FnKernel(move |x: f64, y: f64| if x == 0.5 && y == 0.5 { c } else { 0.0 });
        assert!((fdet_discrete(&rank1, 0, 4, 1e-12).unwrap().value - (1.0 - c)).abs() < 1e-15);
        assert!(fdet_interval(&zero, 0.0, 1.0, 4).is_err());
    }

    #[test]
    fn discrete_requires_decay() {
        let flat = FnKernel(|x: f64, y: f64| if x == y { 0.5 } else { 0.0 });
        assert!(matches!(fdet_discrete(&flat, 0, 10, 1e-12), Err(Error::NonConvergentTail(_))));
        let geo = FnKernel(|x: f64, y: f64| if x == y { 0.5f64.powf(x) } else { 0.0 });
        let r = fdet_discrete(&geo, 0, 60, 1e-12).unwrap();
        let exact: f64 = (0..200).map(|m| 1.0 - 0.5f64.powf(m as f64 + 0.5)).product();
        assert!((r.value - exact).abs() <= r.est_error + 1e-14);
        let all = discrete_gap_probabilities(&geo, -2, 3, 60, 1e-12).unwrap();
        for (i, l) in (-2..=3).enumerate() {
            let direct = fdet_discrete(&geo, l, 60, 1e-12).unwrap().value;
            assert!((all[i].value - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn mapped_pullback_preserves_determinant() {
        let k = FnKernel(|x: f64, y: f64| 0.8 * (x * y).powf(0.25));
        // rank one: det = 1 - 0.8 ∫₀^r √x dx
        let r: f64 = 0.7;
        let exact = 1.0 - 0.8 * 2.0 / 3.0 * r.powf(1.5);
        let mapped = fdet_gap_from_zero(k, r, 2.0, 8).unwrap();
        assert!((mapped.value - exact).abs() < 1e-13);
    }

    #[test]
    fn bessel_gap_is_monotone_and_converges() {
        let k = BesselKernel::new(1.0).unwrap();
        let mut prev = 1.0;
        for r in [0.5, 1.0, 2.0, 4.0] {
            let d = fdet_interval(&k, 0.0, r, 16).unwrap();
            assert!(d.est_error < 1e-12);
            assert!(d.value < prev && d.value > 0.0);
            prev = d.value;
        }
        let s = fdet_series_oracle(&k, QuadDomain::Interval(0.0, 0.5), 4, 12).unwrap();
        assert!((s - fdet_interval(&k, 0.0, 0.5, 16).unwrap().value).abs() < 1e-8);
    }

    #[test]
    fn vacuum_probability_of_discrete_kernel() {
        use crate::fields::ModelParams;
        use crate::kernels::KdKernel;
        let (a, q) = (0.9f64, 0.4f64);
        let k = KdKernel::new(&ModelParams::geometric(a, q, 1.0, 1.0).unwrap()).unwrap();
        let r = fdet_discrete(&k, 0, 60, 1e-13).unwrap();
        let mut exact = 1.0;
        for i in 1..200 {
            for j in 1..200 {
                exact *= 1.0 - a * q.powi(i + j - 1);
            }
        }
        assert!((r.value - exact).abs() < 1e-8, "{} vs {exact}", r.value);
    }

    #[test]
    fn probability_clamp() {
        let ok = FredholmResult { value: -1e-10, est_error: 0.0, nodes: 1 };
        assert_eq!(ok.probability().unwrap(), 0.0);
        let bad = FredholmResult { value: 1.1, est_error: 0.0, nodes: 1 };
        assert!(bad.probability().is_err());
    }
}
