//! Plane partitions, their diagonal slices, and the two insertion
//! bijections from non-negative integer matrices to plane partitions.
//!
//! Plane partitions use the decreasing convention: `Λ_{1,1}` is the largest
//! entry. Slice `k` is the diagonal `λ^{(k)}_i = Λ_{i,i+k}` for
//! `-M ≤ k ≤ N`, so `λ^{(-M)} = λ^{(N)} = ∅`.
//!
//! Both insertions read `W` as the biword of pairs `(f, e) = (M+1-i, N+1-j)`
//! taken with multiplicity `W_ij`. With `P` the insertion tableau (letters
//! `e`) and `Q` the recording tableau (letters `f`):
//!
//! * `λ^{(k)} = sh(P|_{≤ N-k})` for `k ≥ 0`,
//! * `λ^{(-k)} = sh(Q|_{≤ M-k})` for `k > 0`.
//!
//! A letter `f = M+1-i` then contributes `i-1` boxes to the left volume, which
//! is what turns the geometric field into the plane-partition measure.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::Grid;
use crate::lpp::{lpp_max_sum, Orientation};

/// Weakly decreasing non-negative parts with trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    parts: Vec<u64>,
}

impl Partition {
    pub fn new(mut parts: Vec<u64>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(format!("partition parts must be weakly decreasing: {parts:?}")));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Self { parts })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    /// `λ_i` with 1-based `i`; zero past the length.
    pub fn part(&self, i: usize) -> u64 {
        if i == 0 {
            return 0;
        }
        self.parts.get(i - 1).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn size(&self) -> u64 {
        self.parts.iter().sum()
    }

    /// `self ≺ other`: `other_i ≥ self_i ≥ other_{i+1}` for all `i`.
    pub fn interlaces(&self, other: &Partition) -> bool {
        let n = self.len().max(other.len());
        (1..=n + 1).all(|i| other.part(i) >= self.part(i) && self.part(i) >= other.part(i + 1))
    }
}

/// `M × N` array with `Λ_{i,j} ≥ Λ_{i+1,j}` and `Λ_{i,j} ≥ Λ_{i,j+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlanePartition {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl PlanePartition {
    pub fn new(rows: usize, cols: usize, data: Vec<u64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput("plane partition data has the wrong length".into()));
        }
        let pp = Self { rows, cols, data };
        for i in 0..rows {
            for j in 0..cols {
                let x = pp.get(i, j);
                if (i + 1 < rows && pp.get(i + 1, j) > x) || (j + 1 < cols && pp.get(i, j + 1) > x) {
                    return Err(Error::InvalidInput(format!("entries must decrease along rows and columns at ({},{})", i + 1, j + 1)));
                }
            }
        }
        Ok(pp)
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let g = Grid::from_rows(rows)?;
        Self::new(g.rows(), g.cols(), g.as_slice().to_vec())
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry at 0-based `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect()
    }

    pub fn corner(&self) -> u64 {
        self.data.first().copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.data.iter().sum()
    }

    /// One CSV line per row of the matrix.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for row in self.to_rows() {
            let line: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Compact single-line form `a b;c d` used in audit dumps.
    pub fn to_compact(&self) -> String {
        self.to_rows()
            .iter()
            .map(|r| r.iter().map(u64::to_string).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Slices `λ^{(-M)}, …, λ^{(N)}` of an `M × N` plane partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterlacingSequence {
    pub m: usize,
    pub n: usize,
    pub slices: Vec<Partition>,
}

impl InterlacingSequence {
    /// `λ^{(k)}` for `-M ≤ k ≤ N`.
    pub fn slice(&self, k: isize) -> &Partition {
        &self.slices[(k + self.m as isize) as usize]
    }

    pub fn central(&self) -> &Partition {
        self.slice(0)
    }

    /// Checks the chain `∅ ≺ … ≺ λ^{(0)} ≻ … ≻ ∅`.
    pub fn is_interlacing(&self) -> bool {
        let m = self.m as isize;
        let n = self.n as isize;
        self.slice(-m).is_empty()
            && self.slice(n).is_empty()
            && (-m..0).all(|k| self.slice(k).interlaces(self.slice(k + 1)))
            && (0..n).all(|k| self.slice(k + 1).interlaces(self.slice(k)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.slices).expect("partitions serialize")
    }

    /// Rebuilds the plane partition with these slices.
    pub fn to_plane_partition(&self) -> Result<PlanePartition> {
        let (m, n) = (self.m, self.n);
        let mut data = vec![0; m * n];
        for i in 0..m {
            for j in 0..n {
                data[i * n + j] = self.slice(j as isize - i as isize).part(i.min(j) + 1);
            }
        }
        PlanePartition::new(m, n, data)
    }
}

/// Particle positions `l_i = λ_i + M - i` of the central slice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SlicePoints {
    l: Vec<u64>,
}

impl SlicePoints {
    pub fn new(l: Vec<u64>) -> Result<Self> {
        if l.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidInput(format!("slice points must be strictly decreasing: {l:?}")));
        }
        Ok(Self { l })
    }

    pub fn from_partition(lambda: &Partition, m: usize) -> Result<Self> {
        if lambda.len() > m {
            return Err(Error::InvalidInput(format!("partition of length {} does not fit {m} points", lambda.len())));
        }
        Ok(Self { l: (1..=m).map(|i| lambda.part(i) + (m - i) as u64).collect() })
    }

    pub fn points(&self) -> &[u64] {
        &self.l
    }

    pub fn to_partition(&self) -> Partition {
        let m = self.l.len();
        Partition::new(self.l.iter().enumerate().map(|(i, &x)| x - (m - 1 - i) as u64).collect())
            .expect("strictly decreasing points give a partition")
    }
}

pub fn diagonal_slices(pp: &PlanePartition) -> InterlacingSequence {
    let (m, n) = (pp.rows, pp.cols);
    let slices = (-(m as isize)..=n as isize)
        .map(|k| {
            let (i0, j0) = if k >= 0 { (0, k as usize) } else { ((-k) as usize, 0) };
            let len = (m - i0.min(m)).min(n - j0.min(n));
            Partition::new((0..len).map(|t| pp.get(i0 + t, j0 + t)).collect()).expect("diagonals of a plane partition decrease")
        })
        .collect();
    InterlacingSequence { m, n, slices }
}

/// Left, central and right volumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Volumes {
    pub left: u64,
    pub central: u64,
    pub right: u64,
}

pub fn volumes(pp: &PlanePartition) -> Volumes {
    let mut v = Volumes::default();
    for i in 0..pp.rows {
        for j in 0..pp.cols {
            let x = pp.get(i, j);
            match i.cmp(&j) {
                std::cmp::Ordering::Greater => v.left += x,
                std::cmp::Ordering::Equal => v.central += x,
                std::cmp::Ordering::Less => v.right += x,
            }
        }
    }
    v
}

type Tableau = Vec<Vec<u64>>;

/// Row insertion: `x` bumps the leftmost entry strictly greater than it.
fn row_insert(t: &mut Tableau, mut x: u64) -> (usize, usize) {
    for (r, row) in t.iter_mut().enumerate() {
        let pos = row.partition_point(|&y| y <= x);
        if pos == row.len() {
            row.push(x);
            return (r, pos);
        }
        std::mem::swap(&mut row[pos], &mut x);
    }
    t.push(vec![x]);
    (t.len() - 1, 0)
}

/// Column insertion: `x` bumps the topmost entry greater than or equal to it.
fn column_insert(t: &mut Tableau, mut x: u64) -> (usize, usize) {
    let mut c = 0;
    loop {
        let height = t.iter().take_while(|row| row.len() > c).count();
        let hit = (0..height).find(|&r| t[r][c] >= x);
        match hit {
            Some(r) => {
                std::mem::swap(&mut t[r][c], &mut x);
                c += 1;
            }
            None => {
                if height == t.len() {
                    t.push(Vec::new());
                }
                t[height].push(x);
                return (height, c);
            }
        }
    }
}

fn place(q: &mut Tableau, (r, c): (usize, usize), f: u64) {
    if r == q.len() {
        q.push(Vec::new());
    }
    debug_assert_eq!(q[r].len(), c);
    q[r].push(f);
}

/// Shape of the entries `≤ bound` of a semistandard tableau.
fn restricted_shape(t: &Tableau, bound: u64) -> Partition {
    Partition::new(t.iter().map(|row| row.partition_point(|&y| y <= bound) as u64).collect())
        .expect("restriction of a semistandard tableau is a shape")
}

fn pp_from_tableaux(p: &Tableau, q: &Tableau, m: usize, n: usize) -> PlanePartition {
    let mut slices = Vec::with_capacity(m + n + 1);
    for k in (1..=m).rev() {
        slices.push(restricted_shape(q, (m - k) as u64));
    }
    for k in 0..=n {
        slices.push(restricted_shape(p, (n - k) as u64));
    }
    InterlacingSequence { m, n, slices }.to_plane_partition().expect("insertion tableaux yield a plane partition")
}

/// Biword pairs `(f, e)` with multiplicity.
fn biword(w: &Grid<u64>) -> Vec<(u64, u64)> {
    let (m, n) = (w.rows(), w.cols());
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..n {
            for _ in 0..w.get(i, j) {
                out.push(((m - i) as u64, (n - j) as u64));
            }
        }
    }
    out
}

/// RSK by row insertion; `Λ_{1,1}` is the down-left last-passage time.
pub fn rsk_row_insert(w: &Grid<u64>) -> PlanePartition {
    let mut pairs = biword(w);
    pairs.sort_unstable();
    let (mut p, mut q) = (Tableau::new(), Tableau::new());
    for (f, e) in pairs {
        let cell = row_insert(&mut p, e);
        place(&mut q, cell, f);
    }
    pp_from_tableaux(&p, &q, w.rows(), w.cols())
}

/// Burge correspondence by column insertion, ties in `f` taken with `e`
/// decreasing; `Λ_{1,1}` is the down-right last-passage time.
pub fn burge_column_insert(w: &Grid<u64>) -> PlanePartition {
    let mut pairs = biword(w);
    pairs.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    let (mut p, mut q) = (Tableau::new(), Tableau::new());
    for (f, e) in pairs {
        let cell = column_insert(&mut p, e);
        place(&mut q, cell, f);
    }
    pp_from_tableaux(&p, &q, w.rows(), w.cols())
}

/// `Λ_{1,1}` equals the max-sum last-passage time of `w` in `orientation`.
pub fn greene_check(w: &Grid<u64>, pp: &PlanePartition, orientation: Orientation) -> bool {
    match lpp_max_sum(w, orientation) {
        Ok(v) => v == pp.corner(),
        Err(_) => false,
    }
}

/// Every `m × n` matrix with entries in `0..=h`.
pub fn enumerate_matrices(m: usize, n: usize, h: u64) -> Vec<Grid<u64>> {
    let cells = m * n;
    let total = (h + 1).pow(cells as u32);
    (0..total)
        .map(|mut code| {
            let mut g = Grid::new(m, n);
            for k in 0..cells {
                g.set(k / n, k % n, code % (h + 1));
                code /= h + 1;
            }
            g
        })
        .collect()
}

/// The three volume identities carrying the weight field to the measure:
/// `Σ W = central`, `Σ W (i-1/2) = left + central/2` and
/// `Σ W (j-1/2) = right + central/2` (1-based `i`, `j`).
pub fn weight_correspondence(w: &Grid<u64>, pp: &PlanePartition) -> bool {
    let v = volumes(pp);
    let (mut s, mut si, mut sj) = (0u64, 0u64, 0u64);
    for i in 0..w.rows() {
        for j in 0..w.cols() {
            let x = w.get(i, j);
            s += x;
            si += x * i as u64;
            sj += x * j as u64;
        }
    }
    // doubled to stay in integers
    s == v.central && 2 * si + s == 2 * v.left + v.central && 2 * sj + s == 2 * v.right + v.central
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpp::{lpp_oracle, PathMode};
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn part(v: &[u64]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn partition_basics() {
        assert!(Partition::new(vec![1, 2]).is_err());
        let p = part(&[3, 1, 0, 0]);
        assert_eq!(p.parts(), &[3, 1]);
        assert_eq!(p.size(), 4);
        assert!(part(&[2]).interlaces(&part(&[3, 1])));
        assert!(!part(&[2, 2]).interlaces(&part(&[3, 1])));
        assert!(Partition::empty().interlaces(&part(&[4])));
        assert!(!Partition::empty().interlaces(&part(&[4, 1])));
    }

    #[test]
    fn slices_of_small_examples() {
        let z = PlanePartition::zero(2, 2);
        let s = diagonal_slices(&z);
        assert!(s.slices.iter().all(Partition::is_empty));
        assert_eq!(volumes(&z), Volumes::default());

        let pp = PlanePartition::from_rows(&[vec![2, 1], vec![1, 0]]).unwrap();
        let s = diagonal_slices(&pp);
        assert_eq!(s.slice(-1), &part(&[1]));
        assert_eq!(s.slice(0), &part(&[2, 0]));
        assert_eq!(s.slice(1), &part(&[1]));
        assert!(s.is_interlacing());
        assert_eq!(volumes(&pp), Volumes { left: 1, central: 2, right: 1 });
        assert_eq!(s.to_json(), "[[],[1],[2],[1],[]]");
        assert_eq!(s.to_plane_partition().unwrap(), pp);
        assert!(PlanePartition::from_rows(&[vec![1, 2]]).is_err());
    }

    #[test]
    fn slice_points_round_trip() {
        let l = SlicePoints::from_partition(&part(&[3, 1]), 3).unwrap();
        assert_eq!(l.points(), &[5, 2, 0]);
        assert_eq!(l.to_partition(), part(&[3, 1]));
        assert!(SlicePoints::new(vec![2, 2]).is_err());
        assert!(SlicePoints::from_partition(&part(&[1, 1, 1]), 2).is_err());
    }

    #[test]
    fn single_cell() {
        let w = Grid::from_rows(&[vec![3u64]]).unwrap();
        let expect = PlanePartition::from_rows(&[vec![3]]).unwrap();
        assert_eq!(rsk_row_insert(&w), expect);
        assert_eq!(burge_column_insert(&w), expect);
        let z = Grid::<u64>::new(2, 3);
        assert_eq!(rsk_row_insert(&z), PlanePartition::zero(2, 3));
        assert_eq!(burge_column_insert(&z), PlanePartition::zero(2, 3));
    }

    fn check_weights(w: &Grid<u64>, pp: &PlanePartition) {
        assert!(weight_correspondence(w, pp), "{w:?} -> {pp:?}");
    }

    #[test]
    fn exhaustive_two_by_two() {
        let ws = enumerate_matrices(2, 2, 2);
        assert_eq!(ws.len(), 81);
        let (mut seen_rsk, mut seen_burge) = (HashSet::new(), HashSet::new());
        for w in &ws {
            let a = rsk_row_insert(w);
            let b = burge_column_insert(w);
            assert_eq!(a.corner() as f64, lpp_oracle(w, PathMode::GEO_DOWN_LEFT).unwrap().as_f64());
            assert_eq!(b.corner() as f64, lpp_oracle(w, PathMode::GEO_DOWN_RIGHT).unwrap().as_f64());
            assert!(greene_check(w, &a, Orientation::DownLeft));
            assert!(greene_check(w, &b, Orientation::DownRight));
            check_weights(w, &a);
            check_weights(w, &b);
            seen_rsk.insert(a);
            seen_burge.insert(b);
        }
        assert_eq!(seen_rsk.len(), 81);
        assert_eq!(seen_burge.len(), 81);
    }

    #[test]
    fn injective_on_rectangular_boxes() {
        for (m, n, h) in [(1, 3, 3), (2, 3, 1), (3, 3, 1)] {
            let ws = enumerate_matrices(m, n, h);
            let a: HashSet<_> = ws.iter().map(rsk_row_insert).collect();
            let b: HashSet<_> = ws.iter().map(burge_column_insert).collect();
            assert_eq!(a.len(), ws.len());
            assert_eq!(b.len(), ws.len());
        }
    }

    #[test]
    fn csv_dump() {
        let pp = PlanePartition::from_rows(&[vec![2, 1], vec![1, 0]]).unwrap();
        let mut out = Vec::new();
        pp.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "2,1\n1,0\n");
        assert_eq!(pp.to_compact(), "2 1;1 0");
    }

    fn matrix() -> impl Strategy<Value = Grid<u64>> {
        (1usize..=5, 1usize..=5).prop_flat_map(|(m, n)| {
            proptest::collection::vec(0u64..4, m * n).prop_map(move |v| {
                let rows: Vec<Vec<u64>> = v.chunks(n).map(<[u64]>::to_vec).collect();
                Grid::from_rows(&rows).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn insertions_respect_invariants(w in matrix()) {
            for (pp, o) in [(rsk_row_insert(&w), Orientation::DownLeft), (burge_column_insert(&w), Orientation::DownRight)] {
                let s = diagonal_slices(&pp);
                prop_assert!(s.is_interlacing());
                prop_assert_eq!(pp.corner(), s.central().part(1));
                prop_assert!(greene_check(&w, &pp, o));
                check_weights(&w, &pp);
                let v = volumes(&pp);
                prop_assert_eq!(v.left + v.central + v.right, pp.total());
            }
        }

        #[test]
        fn slices_round_trip(w in matrix()) {
            let pp = rsk_row_insert(&w);
            prop_assert_eq!(diagonal_slices(&pp).to_plane_partition().unwrap(), pp);
        }
    }
}
