//! Exact small-instance evaluation of the plane-partition measure.
//!
//! The weight of an `M × N` plane partition is
//! `Q^{left} (a√(QQ̃))^{central} Q̃^{right}`. Summing over the slices left and
//! right of the diagonal turns it into the Schur-measure weight
//! `(a√(QQ̃))^{|λ|} s_λ(1,…,Q^{M-1}) s_λ(1,…,Q̃^{N-1})` of the central slice,
//! and the Schur functions at geometric arguments have a product form that
//! yields the discrete Muttalib–Borodin weight of the particles `l_i`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Extent, ModelParams};
use crate::specfun::qpoch_finite;
use crate::tableaux::{volumes, Partition, PlanePartition, Volumes};

/// Largest number of plane partitions [`enumerate_pp`] will stream.
pub const ENUMERATION_BUDGET: f64 = 1e7;

/// Number of `M × N` plane partitions with entries `≤ H` (MacMahon's box formula).
pub fn boxed_count(m: usize, n: usize, h: u64) -> f64 {
    let mut c = 1.0;
    for i in 1..=m {
        for j in 1..=n {
            c *= (i + j) as f64 - 1.0 + h as f64;
            c /= (i + j) as f64 - 1.0;
        }
    }
    c.round()
}

/// Streams plane partitions in column-major lexicographic order.
pub struct PlanePartitions {
    m: usize,
    n: usize,
    h: u64,
    cells: Vec<u64>,
    started: bool,
    done: bool,
}

impl PlanePartitions {
    /// Column-major position `k` holds `(k % M, k / M)`.
    fn bound(&self, k: usize) -> u64 {
        let (i, j) = (k % self.m, k / self.m);
        let up = if i > 0 { self.cells[k - 1] } else { self.h };
        let left = if j > 0 { self.cells[k - self.m] } else { self.h };
        up.min(left)
    }

    fn current(&self) -> PlanePartition {
        let mut data = vec![0; self.m * self.n];
        for (k, &x) in self.cells.iter().enumerate() {
            data[(k % self.m) * self.n + k / self.m] = x;
        }
        PlanePartition::new(self.m, self.n, data).expect("odometer keeps monotonicity")
    }
}

impl Iterator for PlanePartitions {
    type Item = PlanePartition;

    fn next(&mut self) -> Option<PlanePartition> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.current());
        }
        // later cells are bounded by earlier ones, so resetting them to 0 is always valid
        for k in (0..self.cells.len()).rev() {
            if self.cells[k] < self.bound(k) {
                self.cells[k] += 1;
                for c in &mut self.cells[k + 1..] {
                    *c = 0;
                }
                return Some(self.current());
            }
        }
        self.done = true;
        None
    }
}

/// Every `M × N` plane partition with entries at most `H`, each exactly once.
pub fn enumerate_pp(m: usize, n: usize, h: u64) -> Result<PlanePartitions> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("M and N must be positive".into()));
    }
    let count = boxed_count(m, n, h);
    if count > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded(format!("{count} plane partitions exceed the budget of {ENUMERATION_BUDGET}")));
    }
    Ok(PlanePartitions { m, n, h, cells: vec![0; m * n], started: false, done: false })
}

/// Unnormalized weight with the volume exponents that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureWeight {
    pub value: f64,
    pub volumes: Volumes,
}

pub fn pp_weight(pp: &PlanePartition, p: &ModelParams) -> MeasureWeight {
    let v = volumes(pp);
    let (qr, qc) = (p.q_row(), p.q_col());
    let diag = p.a * (qr * qc).sqrt();
    let value = pow_u(qr, v.left) * pow_u(diag, v.central) * pow_u(qc, v.right);
    MeasureWeight { value, volumes: v }
}

/// `x^k` with `0^0 = 1`.
fn pow_u(x: f64, k: u64) -> f64 {
    if k == 0 {
        1.0
    } else if k <= i32::MAX as u64 {
        x.powi(k as i32)
    } else {
        x.powf(k as f64)
    }
}

/// Tolerance used when the partition function needs a convergent series.
pub const PARTITION_FN_TOL: f64 = 1e-15;

/// `Z = Π_{i ≤ M, j ≤ N} (1 - a Q^{i-1/2} Q̃^{j-1/2})^{-1}`.
pub fn partition_fn(p: &ModelParams) -> Result<f64> {
    log_partition_fn(p).map(f64::exp)
}

/// `log Z`; finite boxes are summed factor by factor, infinite ones through
/// `log Z = Σ_k (a^k / k) S_M(Q^k) S_N(Q̃^k)` with `S_M(x) = Σ_{i ≤ M} x^{i-1/2}`.
pub fn log_partition_fn(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    let (qr, qc) = (p.q_row(), p.q_col());
    let first = p.a * (qr * qc).sqrt();
    if first >= 1.0 {
        return Err(Error::NonConvergentTail(format!("factor (1 - {first}) vanishes")));
    }
    if p.a == 0.0 {
        return Ok(0.0);
    }
    if let (Extent::Finite(m), Extent::Finite(n)) = (p.m, p.n) {
        let mut s = 0.0;
        for i in 1..=m {
            for j in 1..=n {
                s -= (-p.a * qr.powf(i as f64 - 0.5) * qc.powf(j as f64 - 0.5)).ln_1p();
            }
        }
        return Ok(s);
    }
    if (p.m.is_infinite() && qr >= 1.0) || (p.n.is_infinite() && qc >= 1.0) {
        return Err(Error::NonConvergentTail("infinite product diverges".into()));
    }
    let s = |x: f64, ext: Extent| -> f64 {
        match ext {
            Extent::Infinite => x.sqrt() / (1.0 - x),
            Extent::Finite(m) if x == 1.0 => m as f64,
            Extent::Finite(m) => x.sqrt() * (1.0 - x.powi(m as i32)) / (1.0 - x),
        }
    };
    let mut total = 0.0;
    for k in 1..=10_000_000u64 {
        let kf = k as f64;
        let term = p.a.powf(kf) / kf * s(qr.powf(kf), p.m) * s(qc.powf(kf), p.n);
        total += term;
        // terms decay at least geometrically with ratio `first`
        if term <= PARTITION_FN_TOL * total * (1.0 - first) {
            return Ok(total);
        }
    }
    Err(Error::NonConvergence("partition function series did not converge".into()))
}

/// `u^a - u^b` for `a < b`, written as `u^a (1 - u^{b-a})` to avoid cancellation.
fn pow_diff(u: f64, a: f64, b: f64) -> f64 {
    if u == 1.0 {
        return 0.0;
    }
    -u.powf(a) * ((b - a) * u.ln()).exp_m1()
}

/// `s_λ(1, u, …, u^{n-1})` by the principal-specialization product formula.
pub fn schur_principal(lambda: &Partition, u: f64, n: usize) -> Result<f64> {
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!("u must be >= 0, got {u}")));
    }
    if lambda.len() > n {
        return Ok(0.0);
    }
    if u == 0.0 {
        return Ok(if lambda.len() <= 1 { 1.0 } else { 0.0 });
    }
    let ln_u = u.ln();
    let mut log = 0.0;
    for i in 1..=n {
        for j in (i + 1)..=n {
            let gap = (lambda.part(i) - lambda.part(j)) as f64 + (j - i) as f64;
            let ratio = if u == 1.0 {
                gap / (j - i) as f64
            } else {
                // (u^{a_i} - u^{a_j}) / (u^{n-i} - u^{n-j}) with a_k = λ_k + n - k
                u.powf(lambda.part(j) as f64) * (gap * ln_u).exp_m1() / ((j - i) as f64 * ln_u).exp_m1()
            };
            log += ratio.ln();
        }
    }
    Ok(log.exp())
}

/// `s_λ(vars)` as the sum over semistandard tableaux of `x^T`.
pub fn schur_combinatorial_oracle(lambda: &Partition, vars: &[f64]) -> Result<f64> {
    if lambda.size() > 8 || vars.len() > 4 {
        return Err(Error::BudgetExceeded("oracle limited to |λ| <= 8 and at most 4 variables".into()));
    }
    let shape: Vec<usize> = lambda.parts().iter().map(|&x| x as usize).collect();
    let mut cells = Vec::new();
    for (r, &len) in shape.iter().enumerate() {
        for c in 0..len {
            cells.push((r, c));
        }
    }
    let mut fill: Vec<Vec<usize>> = shape.iter().map(|&l| vec![0; l]).collect();
    fn go(k: usize, cells: &[(usize, usize)], fill: &mut Vec<Vec<usize>>, vars: &[f64], acc: f64) -> f64 {
        if k == cells.len() {
            return acc;
        }
        let (r, c) = cells[k];
        let lo = {
            let left = if c > 0 { fill[r][c - 1] } else { 0 };
            let up = if r > 0 { fill[r - 1][c] + 1 } else { 0 };
            left.max(up)
        };
        let mut s = 0.0;
        for v in lo..vars.len() {
            fill[r][c] = v;
            s += go(k + 1, cells, fill, vars, acc * vars[v]);
        }
        s
    }
    Ok(go(0, &cells, &mut fill, vars, 1.0))
}

fn finite_mn(p: &ModelParams) -> Result<(usize, usize)> {
    match (p.m, p.n) {
        (Extent::Finite(m), Extent::Finite(n)) => Ok((m, n)),
        _ => Err(Error::InfiniteExtent("finite M and N required".into())),
    }
}

/// `(a√(QQ̃))^{|λ|} s_λ(1,…,Q^{M-1}) s_λ(1,…,Q̃^{N-1})`.
pub fn schur_measure_weight(lambda: &Partition, p: &ModelParams) -> Result<f64> {
    let (m, n) = finite_mn(p)?;
    let (qr, qc) = (p.q_row(), p.q_col());
    let diag = p.a * (qr * qc).sqrt();
    Ok(pow_u(diag, lambda.size()) * schur_principal(lambda, qr, m)? * schur_principal(lambda, qc, n)?)
}

/// Discrete Muttalib–Borodin weight of the particles `l`, up to a constant
/// depending only on the parameters. Zero unless `l` is strictly decreasing.
pub fn mb_slice_weight(l: &[u64], p: &ModelParams) -> Result<f64> {
    let (_, n) = finite_mn(p)?;
    let m = l.len();
    if m > n {
        return Err(Error::InvalidInput(format!("{m} points exceed N = {n}")));
    }
    if l.windows(2).any(|w| w[0] <= w[1]) {
        return Ok(0.0);
    }
    let (qr, qc) = (p.q_row(), p.q_col());
    let diag = p.a * (qr * qc).sqrt();
    let mut w = 1.0;
    for i in 0..m {
        for j in (i + 1)..m {
            let (hi, lo) = (l[i] as f64, l[j] as f64);
            w *= pow_diff(qr, lo, hi) * pow_diff(qc, lo, hi);
        }
        w *= pow_u(diag, l[i]) * qpoch_finite(qc.powf(l[i] as f64 + 1.0), qc, n - m);
    }
    Ok(w)
}

/// Writes `plane_partition,left,central,right,weight` for every boxed plane partition.
pub fn write_weight_csv<W: Write>(mut w: W, m: usize, n: usize, h: u64, p: &ModelParams) -> Result<()> {
    writeln!(w, "plane_partition,left,central,right,weight")?;
    for pp in enumerate_pp(m, n, h)? {
        let mw = pp_weight(&pp, p);
        let v = mw.volumes;
        writeln!(w, "{},{},{},{},{:.17e}", pp.to_compact(), v.left, v.central, v.right, mw.value)?;
    }
    Ok(())
}
