//! Model parameters and the random weight fields driving both LPP models.
//!
//! Site `(i, j)` (1-based) carries either a geometric variable with
//! parameter `a Q^{i-1/2} Q̃^{j-1/2}` or a power variable with exponent
//! `α + η(i-1/2) + θ(j-1/2)`, where `Q = q^η` and `Q̃ = q^θ`.
//!
//! Randomness is counter based: the uniform driving site `(i, j)` is word
//! `site_index(i, j)` of the ChaCha8 stream selected by `(seed, stream)`. A
//! field therefore does not depend on the order in which sites are visited
//! or on the truncation box, so refining `tv_tol` only ever adds sites.

use std::fmt;
use std::io::Write;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default total-variation budget for truncating an infinite quadrant.
pub const DEFAULT_TV_TOL: f64 = 1e-9;

/// Number of rows or columns: a positive integer or unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extent {
    Finite(usize),
    Infinite,
}

impl Extent {
    pub fn finite(self) -> Option<usize> {
        match self {
            Extent::Finite(n) => Some(n),
            Extent::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Extent::Infinite)
    }
}

impl fmt::Display for Extent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extent::Finite(n) => write!(f, "{n}"),
            Extent::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Extent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Extent::Infinite),
            t => t
                .parse::<usize>()
                .map(Extent::Finite)
                .map_err(|_| Error::InvalidInput(format!("extent must be a positive integer or 'inf', got {s:?}"))),
        }
    }
}

impl Serialize for Extent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Extent::Finite(n) => s.serialize_u64(*n as u64),
            Extent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Extent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(Extent::Finite(n as usize)),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn default_extent() -> Extent {
    Extent::Infinite
}

/// The parameter tuple `(a, q, η, θ, α, M, N)`.
///
/// `a, q` drive the discrete model, `α` the continuous one; `η, θ` and the
/// extents are shared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub q: f64,
    pub eta: f64,
    pub theta: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_extent")]
    pub m: Extent,
    #[serde(default = "default_extent")]
    pub n: Extent,
}

impl ModelParams {
    /// Discrete model on the infinite quadrant.
    pub fn geometric(a: f64, q: f64, eta: f64, theta: f64) -> Result<Self> {
        Self { a, q, eta, theta, alpha: 0.0, m: Extent::Infinite, n: Extent::Infinite }.validated()
    }

    /// Continuous model on an `m × n` rectangle.
    pub fn power(alpha: f64, eta: f64, theta: f64, m: usize, n: usize) -> Result<Self> {
        let p = Self { a: 0.0, q: 0.0, eta, theta, alpha, m: Extent::Finite(m), n: Extent::Finite(n) }.validated()?;
        if alpha == 0.0 && eta == 0.0 && theta == 0.0 {
            return Err(Error::ParameterOutOfRange("alpha, eta, theta must not all be zero".into()));
        }
        Ok(p)
    }

    pub fn with_extent(mut self, m: Extent, n: Extent) -> Result<Self> {
        self.m = m;
        self.n = n;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ParameterOutOfRange(msg));
        for (name, v) in [("a", self.a), ("q", self.q), ("eta", self.eta), ("theta", self.theta), ("alpha", self.alpha)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if !(0.0..=1.0).contains(&self.a) || !(0.0..=1.0).contains(&self.q) {
            return bad(format!("need 0 <= a, q <= 1 (a={}, q={})", self.a, self.q));
        }
        if self.a == 1.0 && self.q == 1.0 {
            return bad("a and q must not both equal 1".into());
        }
        if self.eta < 0.0 || self.theta < 0.0 || self.alpha < 0.0 {
            return bad("eta, theta, alpha must be non-negative".into());
        }
        for e in [self.m, self.n] {
            if e == Extent::Finite(0) {
                return bad("M and N must be positive".into());
            }
        }
        if let (Extent::Finite(m), Extent::Finite(n)) = (self.m, self.n) {
            if m > n {
                return bad(format!("need M <= N, got M={m}, N={n}"));
            }
        }
        Ok(())
    }

    /// `Q = q^η`.
    pub fn q_row(&self) -> f64 {
        self.q.powf(self.eta)
    }

    /// `Q̃ = q^θ`.
    pub fn q_col(&self) -> f64 {
        self.q.powf(self.theta)
    }
}

/// Seed and substream of the counter-based generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RandomSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RandomSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }
}

/// Dense row-major matrix; `get(i, j)` is 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> Grid<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::default(); rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged matrix".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.concat() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.cols.max(1)).map(<[T]>::to_vec).take(self.rows).collect()
    }

    /// Rows in reverse order.
    pub fn flip_rows(&self) -> Self {
        let mut out = Self::new(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(self.rows - 1 - i, j, self.get(i, j));
            }
        }
        out
    }
}

impl<T: Copy + Default + fmt::Display> Grid<T> {
    /// `row,col,value` lines with 1-based indices and a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "row,col,value")?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                writeln!(w, "{},{},{}", i + 1, j + 1, self.get(i, j))?;
            }
        }
        Ok(())
    }
}

/// Sampled geometric weights, possibly a truncation of the infinite quadrant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeomField {
    pub entries: Grid<u64>,
    /// `(rows, cols)` of the box actually sampled.
    pub bbox: (usize, usize),
    pub tv_tol: f64,
    /// `Σ u_ij` over sites that were not sampled; bounds the probability
    /// that any of them is non-zero.
    pub discarded_mass: f64,
}

/// Sampled power weights on a finite rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowField {
    pub entries: Grid<f64>,
}

/// Geometric parameter `u_ij = a Q^{i-1/2} Q̃^{j-1/2}` of site `(i, j)`, 1-based.
pub fn geom_param(i: usize, j: usize, p: &ModelParams) -> Result<f64> {
    if i == 0 || j == 0 {
        return Err(Error::InvalidInput("site indices are 1-based".into()));
    }
    let u = p.a * p.q_row().powf(i as f64 - 0.5) * p.q_col().powf(j as f64 - 0.5);
    if u >= 1.0 {
        return Err(Error::ParameterOutOfRange(format!("geometric parameter {u} at ({i},{j}) is not < 1")));
    }
    Ok(u)
}

/// Power exponent `β_ij = α + η(i-1/2) + θ(j-1/2)` of site `(i, j)`, 1-based.
pub fn pow_param(i: usize, j: usize, p: &ModelParams) -> Result<f64> {
    if i == 0 || j == 0 {
        return Err(Error::InvalidInput("site indices are 1-based".into()));
    }
    let beta = p.alpha + p.eta * (i as f64 - 0.5) + p.theta * (j as f64 - 0.5);
    if beta <= 0.0 {
        return Err(Error::ParameterOutOfRange(format!("power exponent {beta} at ({i},{j}) is not > 0")));
    }
    Ok(beta)
}

/// Position of site `(i, j)` (1-based) in the anti-diagonal enumeration.
pub fn site_index(i: usize, j: usize) -> u64 {
    let d = (i + j - 2) as u64;
    d * (d + 1) / 2 + (i - 1) as u64
}

/// Draws the uniforms of a field, one 64-bit word per site.
pub(crate) struct SiteRng {
    rng: ChaCha8Rng,
    next: Option<u64>,
}

impl SiteRng {
    pub(crate) fn new(seed: RandomSeed) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.seed);
        rng.set_stream(seed.stream);
        Self { rng, next: None }
    }

    /// Uniform on the open interval (0, 1) keyed by site.
    pub(crate) fn uniform(&mut self, i: usize, j: usize) -> f64 {
        let idx = site_index(i, j);
        if self.next != Some(idx) {
            self.rng.set_word_pos(2 * idx as u128);
        }
        self.next = Some(idx + 1);
        let x = self.rng.next_u64();
        ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

/// Inverse-CDF geometric draw: `P(k) = (1-u) u^k` from a uniform `v ∈ (0,1)`.
pub fn geometric_from_uniform(u: f64, v: f64) -> u64 {
    if v > u || u <= 0.0 {
        return 0;
    }
    (v.ln() / u.ln()).floor() as u64
}

/// `x^{k-1/2}` for `k = 1..=len`.
fn half_powers(x: f64, len: usize) -> Vec<f64> {
    (1..=len).map(|k| x.powf(k as f64 - 0.5)).collect()
}

/// Sites are visited diagonal by diagonal, so draws within a diagonal are
/// contiguous words of the stream.
fn for_each_site(rows: usize, cols: usize, mut keep: impl FnMut(usize, usize) -> bool, mut f: impl FnMut(usize, usize)) {
    if rows == 0 || cols == 0 {
        return;
    }
    for d in 0..(rows + cols - 1) {
        let i_lo = (d + 1).saturating_sub(cols - 1).max(1);
        let i_hi = (d + 1).min(rows);
        for i in i_lo..=i_hi {
            let j = d + 2 - i;
            if keep(i, j) {
                f(i, j);
            }
        }
    }
}

/// Sum of `x^{k-1/2}` over `k = lo..=hi` (`hi = None` means infinity).
fn half_power_sum(x: f64, lo: usize, hi: Option<usize>) -> f64 {
    if let Some(h) = hi {
        if h < lo {
            return 0.0;
        }
    }
    if x == 1.0 {
        return match hi {
            Some(h) => (h + 1 - lo) as f64,
            None => f64::INFINITY,
        };
    }
    let head = x.powf(lo as f64 - 0.5);
    match hi {
        Some(h) => head * (1.0 - x.powi((h + 1 - lo) as i32)) / (1.0 - x),
        None => head / (1.0 - x),
    }
}

/// Triangular truncation `{(i,j): (i-1/2)λ_r + (j-1/2)λ_c ≤ t}` of the
/// (possibly infinite) `M × N` rectangle, where `u_ij = a e^{-…}`.
struct Truncation {
    lam_row: f64,
    lam_col: f64,
    m: Option<usize>,
    n: Option<usize>,
}

impl Truncation {
    /// Last kept column in row `i` at threshold `t`.
    fn row_len(&self, i: usize, t: f64) -> usize {
        let rest = t - (i as f64 - 0.5) * self.lam_row;
        if rest < 0.5 * self.lam_col {
            return 0;
        }
        if self.lam_col == 0.0 {
            return self.n.expect("checked: finite when unscaled");
        }
        let j = ((rest / self.lam_col) + 0.5).floor() as usize;
        self.n.map_or(j, |n| j.min(n))
    }

    fn rows_kept(&self, t: f64) -> usize {
        if self.lam_row == 0.0 {
            return if self.row_len(1, t) > 0 { self.m.expect("checked: finite when unscaled") } else { 0 };
        }
        let r = ((t - 0.5 * self.lam_col) / self.lam_row + 0.5).floor();
        let r = if r < 0.0 { 0 } else { r as usize };
        self.m.map_or(r, |m| r.min(m))
    }

    /// Mass `Σ u_ij / a` outside the kept region.
    fn discarded(&self, t: f64) -> f64 {
        let (qr, qc) = ((-self.lam_row).exp(), (-self.lam_col).exp());
        let rows = self.rows_kept(t);
        let mut tail = 0.0;
        for i in 1..=rows {
            let jl = self.row_len(i, t);
            tail += qr.powf(i as f64 - 0.5) * half_power_sum(qc, jl + 1, self.n);
        }
        tail + half_power_sum(qr, rows + 1, self.m) * half_power_sum(qc, 1, self.n)
    }
}

/// Samples the geometric field.
///
/// Finite rectangles are sampled in full. For an infinite direction the
/// quadrant is cut to the triangle `{u_ij ≥ u_min}` with `u_min` as large as
/// possible subject to `Σ_{discarded} u_ij < tv_tol`; by the union bound the
/// returned field differs from the infinite one with probability below
/// `tv_tol`.
pub fn sample_geom_field(p: &ModelParams, seed: RandomSeed, tv_tol: f64) -> Result<GeomField> {
    p.validate()?;
    if !(tv_tol > 0.0) {
        return Err(Error::InvalidInput(format!("tv_tol must be > 0, got {tv_tol}")));
    }
    let (m, n) = (p.m.finite(), p.n.finite());
    let (qr, qc) = (p.q_row(), p.q_col());
    let mut rng = SiteRng::new(seed);

    if let (Some(m), Some(n)) = (m, n) {
        let mut entries = Grid::new(m, n);
        let (rp, cp) = (half_powers(qr, m), half_powers(qc, n));
        for_each_site(m, n, |_, _| true, |i, j| {
            let u = p.a * rp[i - 1] * cp[j - 1];
            entries.set(i - 1, j - 1, geometric_from_uniform(u, rng.uniform(i, j)));
        });
        if p.a * qr.sqrt() * qc.sqrt() >= 1.0 {
            return Err(Error::ParameterOutOfRange("geometric parameter at (1,1) is not < 1".into()));
        }
        return Ok(GeomField { entries, bbox: (m, n), tv_tol, discarded_mass: 0.0 });
    }

    if p.a == 0.0 {
        let (r, c) = (m.unwrap_or(1), n.unwrap_or(1));
        return Ok(GeomField { entries: Grid::new(r, c), bbox: (r, c), tv_tol, discarded_mass: 0.0 });
    }
    if (m.is_none() && qr >= 1.0) || (n.is_none() && qc >= 1.0) {
        return Err(Error::NonConvergentTail(format!(
            "Σ u_ij diverges on an infinite direction (Q={qr}, Q~={qc})"
        )));
    }
    let tr = Truncation { lam_row: -qr.ln(), lam_col: -qc.ln(), m, n };
    let budget = tv_tol / p.a;
    let mut hi = 1.0;
    while tr.discarded(hi) >= budget {
        hi *= 2.0;
        if hi > 1e7 {
            return Err(Error::BudgetExceeded("truncation box too large".into()));
        }
    }
    let mut lo = 0.0;
    if tr.discarded(lo) >= budget {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if tr.discarded(mid) < budget {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-12 * hi {
                break;
            }
        }
    } else {
        hi = lo;
    }
    let t = hi;
    let rows = tr.rows_kept(t).max(1);
    let cols = tr.row_len(1, t).max(1);
    let mut entries = Grid::new(rows, cols);
    let (rp, cp) = (half_powers(qr, rows), half_powers(qc, cols));
    let lens: Vec<usize> = (1..=rows).map(|i| tr.row_len(i, t)).collect();
    for_each_site(rows, cols, |i, j| j <= lens[i - 1], |i, j| {
        let u = p.a * rp[i - 1] * cp[j - 1];
        entries.set(i - 1, j - 1, geometric_from_uniform(u, rng.uniform(i, j)));
    });
    Ok(GeomField { entries, bbox: (rows, cols), tv_tol, discarded_mass: p.a * tr.discarded(t) })
}

/// Samples the power field `U^{1/β_ij}` on the finite `M × N` rectangle.
pub fn sample_pow_field(p: &ModelParams, seed: RandomSeed) -> Result<PowField> {
    p.validate()?;
    let (Some(m), Some(n)) = (p.m.finite(), p.n.finite()) else {
        return Err(Error::InfiniteExtent("power fields need finite M and N".into()));
    };
    let mut betas = Grid::new(m, n);
    for i in 1..=m {
        for j in 1..=n {
            betas.set(i - 1, j - 1, pow_param(i, j, p)?);
        }
    }
    let mut rng = SiteRng::new(seed);
    let mut entries = Grid::new(m, n);
    for_each_site(m, n, |_, _| true, |i, j| {
        let v = rng.uniform(i, j);
        entries.set(i - 1, j - 1, v.powf(1.0 / betas.get(i - 1, j - 1)));
    });
    Ok(PowField { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite(a: f64, q: f64, eta: f64, theta: f64, m: usize, n: usize) -> ModelParams {
        ModelParams { a, q, eta, theta, alpha: 0.0, m: Extent::Finite(m), n: Extent::Finite(n) }
    }

    #[test]
    fn geom_param_examples() {
        let p = ModelParams { a: 1.0, q: 1.0, eta: 1.0, theta: 1.0, alpha: 0.0, m: Extent::Infinite, n: Extent::Infinite };
        assert!(p.validate().is_err());
        assert!(geom_param(1, 1, &p).is_err());
        let p = ModelParams::geometric(0.8, 0.5, 1.0, 1.0).unwrap();
        assert!((geom_param(1, 1, &p).unwrap() - 0.4).abs() < 1e-15);
        let p = ModelParams::geometric(1.0, 0.25, 1.0, 2.0).unwrap();
        assert!((geom_param(2, 1, &p).unwrap() - 0.25f64.powf(2.5)).abs() < 1e-15);
        assert!((geom_param(2, 1, &p).unwrap() - 0.03125).abs() < 1e-15);
    }

    #[test]
    fn pow_param_examples() {
        let p = ModelParams::power(0.0, 1.0, 1.0, 3, 3).unwrap();
        assert_eq!(pow_param(1, 1, &p).unwrap(), 1.0);
        let p = ModelParams::power(0.5, 1.0, 2.0, 3, 3).unwrap();
        assert_eq!(pow_param(2, 3, &p).unwrap(), 7.0);
        assert!(ModelParams::power(0.0, 0.0, 0.0, 3, 3).is_err());
        let zero = ModelParams { a: 0.0, q: 0.0, eta: 0.0, theta: 0.0, alpha: 0.0, m: Extent::Finite(1), n: Extent::Finite(1) };
        assert!(pow_param(1, 1, &zero).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(finite(0.5, 0.5, 1.0, 1.0, 3, 2).validate().is_err());
        assert!(finite(1.2, 0.5, 1.0, 1.0, 2, 2).validate().is_err());
        assert!(finite(0.5, 0.5, -1.0, 1.0, 2, 2).validate().is_err());
        assert!(finite(0.5, 0.5, 1.0, 1.0, 0, 2).validate().is_err());
        assert!(finite(0.5, 0.5, 1.0, 1.0, 2, 2).validate().is_ok());
        let json = r#"{"a":0.5,"q":0.3,"eta":1,"theta":2,"m":2,"n":"inf"}"#;
        let p: ModelParams = serde_json::from_str(json).unwrap();
        assert_eq!(p.n, Extent::Infinite);
        assert!(serde_json::from_str::<ModelParams>(r#"{"eta":1,"theta":1,"bogus":2}"#).is_err());
    }

    #[test]
    fn zero_field_when_a_vanishes() {
        let p = ModelParams::geometric(0.0, 0.5, 1.0, 1.0).unwrap();
        let f = sample_geom_field(&p, RandomSeed::new(1, 0), 1e-9).unwrap();
        assert!(f.entries.as_slice().iter().all(|&x| x == 0));
        let p = finite(0.0, 0.5, 1.0, 1.0, 4, 5);
        let f = sample_geom_field(&p, RandomSeed::new(1, 0), 1e-9).unwrap();
        assert!(f.entries.as_slice().iter().all(|&x| x == 0));
    }

    #[test]
    fn truncation_box_matches_direct_summation() {
        let (a, q) = (0.9, 0.5f64);
        let p = ModelParams::geometric(a, q, 1.0, 1.0).unwrap();
        let f = sample_geom_field(&p, RandomSeed::new(3, 0), 1e-9).unwrap();
        // oracle: smallest B with Σ_{i+j-1 > B} a q^{i+j-1} < 1e-9, summed site by site
        let tail = |b: usize| {
            let mut s = 0.0;
            for i in 1..200usize {
                for j in 1..200usize {
                    if i + j - 1 > b {
                        s += a * q.powi((i + j - 1) as i32);
                    }
                }
            }
            s
        };
        let b = (1..100).find(|&b| tail(b) < 1e-9).unwrap();
        assert_eq!(f.bbox, (b, b));
        assert!(f.discarded_mass < 1e-9);
        assert!((f.discarded_mass - tail(b)).abs() < 1e-15);
    }

    #[test]
    fn truncation_mixed_extent() {
        let p = ModelParams { a: 0.7, q: 0.6, eta: 0.0, theta: 1.5, alpha: 0.0, m: Extent::Finite(3), n: Extent::Infinite };
        let f = sample_geom_field(&p, RandomSeed::new(9, 0), 1e-8).unwrap();
        assert_eq!(f.bbox.0, 3);
        assert!(f.discarded_mass < 1e-8);
        let p = ModelParams { m: Extent::Infinite, ..p };
        assert!(matches!(sample_geom_field(&p, RandomSeed::new(9, 0), 1e-8), Err(Error::NonConvergentTail(_))));
        assert!(sample_geom_field(&finite(0.5, 0.5, 1.0, 1.0, 2, 2), RandomSeed::default(), 0.0).is_err());
    }

    #[test]
    fn geometric_single_site_mean() {
        let p = finite(0.5, 1.0, 1.0, 1.0, 1, 1);
        let n = 1_000_000u64;
        let mut total = 0u64;
        let mut zeros = 0u64;
        for s in 0..n {
            let f = sample_geom_field(&p, RandomSeed::new(11, s), 1e-9).unwrap();
            let x = f.entries.get(0, 0);
            total += x;
            zeros += (x == 0) as u64;
        }
        let mean = total as f64 / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        // P(X = 0) = 1 - u within 4 binomial standard deviations
        let p0 = zeros as f64 / n as f64;
        let sd = (0.25f64 / n as f64).sqrt();
        assert!((p0 - 0.5).abs() < 4.0 * sd, "P(0) {p0}");
    }

    #[test]
    fn geometric_inverse_cdf() {
        assert_eq!(geometric_from_uniform(0.0, 0.3), 0);
        assert_eq!(geometric_from_uniform(0.5, 0.6), 0);
        assert_eq!(geometric_from_uniform(0.5, 0.5), 1);
        assert_eq!(geometric_from_uniform(0.5, 0.2), 2);
    }

    #[test]
    fn power_field_moments_and_inverse_cdf() {
        assert!((0.25f64.powf(1.0 / 2.0) - 0.5).abs() < 1e-15);
        // β = 7 at site (2,3) with α=0.5, η=1, θ=2
        let p = ModelParams::power(0.5, 1.0, 2.0, 2, 3).unwrap();
        let n = 1_000_000u64;
        let mut sum = 0.0;
        for s in 0..n {
            sum += sample_pow_field(&p, RandomSeed::new(5, s)).unwrap().entries.get(1, 2);
        }
        let mean = sum / n as f64;
        assert!((mean - 0.875).abs() < 0.001, "mean {mean}");
        let inf = ModelParams { m: Extent::Infinite, ..p };
        assert!(matches!(sample_pow_field(&inf, RandomSeed::default()), Err(Error::InfiniteExtent(_))));
    }

    #[test]
    fn power_field_ks_against_x_pow_beta() {
        let p = ModelParams::power(0.0, 1.0, 1.0, 2, 2).unwrap();
        let n = 100_000;
        for (i, j) in [(1usize, 1usize), (2, 2)] {
            let beta = pow_param(i, j, &p).unwrap();
            let mut xs: Vec<f64> =
                (0..n).map(|s| sample_pow_field(&p, RandomSeed::new(21, s)).unwrap().entries.get(i - 1, j - 1)).collect();
            assert!(xs.iter().all(|&x| x > 0.0 && x < 1.0));
            xs.sort_by(f64::total_cmp);
            let nf = n as f64;
            let d = xs
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    let c = x.powf(beta);
                    (c - k as f64 / nf).abs().max(((k + 1) as f64 / nf - c).abs())
                })
                .fold(0.0, f64::max);
            assert!(d < 1.63 / nf.sqrt(), "site ({i},{j}) KS {d}");
        }
    }

    #[test]
    fn sampling_is_deterministic_and_box_independent() {
        let p = ModelParams::geometric(0.9, 0.6, 1.0, 2.0).unwrap();
        let s = RandomSeed::new(77, 3);
        let a = sample_geom_field(&p, s, 1e-6).unwrap();
        let b = sample_geom_field(&p, s, 1e-6).unwrap();
        assert_eq!(a, b);
        let fine = sample_geom_field(&p, s, 1e-9).unwrap();
        assert!(fine.bbox.0 >= a.bbox.0 && fine.bbox.1 >= a.bbox.1);
        for i in 0..a.bbox.0 {
            for j in 0..a.bbox.1 {
                if a.entries.get(i, j) != 0 {
                    assert_eq!(a.entries.get(i, j), fine.entries.get(i, j));
                }
            }
        }
    }

    #[test]
    fn csv_has_header_and_one_line_per_site() {
        let g = Grid::from_rows(&[vec![1u64, 2], vec![3, 4]]).unwrap();
        let mut out = Vec::new();
        g.write_csv(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(s.lines().next(), Some("row,col,value"));
        assert_eq!(s.lines().count(), 5);
        assert!(s.contains("2,1,3"));
    }
}
