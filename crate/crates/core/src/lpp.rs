//! Last-passage times over monotone lattice paths.
//!
//! A down-left path runs from `(1,1)` to `(M,N)` increasing one coordinate
//! per step; a down-right path runs from `(M,1)` to `(1,N)` decreasing the
//! row or increasing the column. Both endpoints are included in the path.
//! Min-product values are computed as `exp(-max Σ -log ω)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    DownLeft,
    DownRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combine {
    MaxSum,
    MinProduct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathMode {
    pub orientation: Orientation,
    pub combine: Combine,
}

impl PathMode {
    pub const GEO_DOWN_LEFT: Self = Self { orientation: Orientation::DownLeft, combine: Combine::MaxSum };
    pub const GEO_DOWN_RIGHT: Self = Self { orientation: Orientation::DownRight, combine: Combine::MaxSum };
    pub const POW_DOWN_LEFT: Self = Self { orientation: Orientation::DownLeft, combine: Combine::MinProduct };
    pub const POW_DOWN_RIGHT: Self = Self { orientation: Orientation::DownRight, combine: Combine::MinProduct };

    pub fn new(orientation: Orientation, combine: Combine) -> Self {
        Self { orientation, combine }
    }
}

/// Borrowed weight matrix of either kind.
#[derive(Debug, Clone, Copy)]
pub enum Weights<'a> {
    Int(&'a Grid<u64>),
    Real(&'a Grid<f64>),
}

impl<'a> From<&'a Grid<u64>> for Weights<'a> {
    fn from(g: &'a Grid<u64>) -> Self {
        Weights::Int(g)
    }
}

impl<'a> From<&'a Grid<f64>> for Weights<'a> {
    fn from(g: &'a Grid<f64>) -> Self {
        Weights::Real(g)
    }
}

impl Weights<'_> {
    fn dims(&self) -> (usize, usize) {
        match self {
            Weights::Int(g) => (g.rows(), g.cols()),
            Weights::Real(g) => (g.rows(), g.cols()),
        }
    }

    fn real(&self, i: usize, j: usize) -> f64 {
        match self {
            Weights::Int(g) => g.get(i, j) as f64,
            Weights::Real(g) => g.get(i, j),
        }
    }
}

/// Integer for max-sum over an integer field, real otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LppValue {
    Int(u64),
    Real(f64),
}

impl LppValue {
    pub fn as_f64(self) -> f64 {
        match self {
            LppValue::Int(v) => v as f64,
            LppValue::Real(v) => v,
        }
    }
}

/// Max-sum DP for the down-left orientation on row-major data.
fn dp_max_sum<T: Copy + PartialOrd + std::ops::Add<Output = T>>(rows: usize, cols: usize, w: impl Fn(usize, usize) -> T) -> T {
    let mut g: Vec<T> = Vec::with_capacity(cols);
    for j in 0..cols {
        let x = w(0, j);
        g.push(if j == 0 { x } else { g[j - 1] + x });
    }
    for i in 1..rows {
        g[0] = g[0] + w(i, 0);
        for j in 1..cols {
            let best = if g[j] >= g[j - 1] { g[j] } else { g[j - 1] };
            g[j] = best + w(i, j);
        }
    }
    g[cols - 1]
}

fn check_nonempty(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidInput("empty field".into()));
    }
    Ok(())
}

/// Row index as seen by the down-left kernel.
fn row_map(orientation: Orientation, rows: usize) -> impl Fn(usize) -> usize {
    move |i| match orientation {
        Orientation::DownLeft => i,
        Orientation::DownRight => rows - 1 - i,
    }
}

/// `max Σ ω` over paths of the given orientation.
pub fn lpp_max_sum(w: &Grid<u64>, orientation: Orientation) -> Result<u64> {
    let (r, c) = (w.rows(), w.cols());
    check_nonempty(r, c)?;
    let rm = row_map(orientation, r);
    Ok(dp_max_sum(r, c, |i, j| w.get(rm(i), j)))
}

/// `min Σ log ω` over paths; `-inf` when some optimal path hits a zero.
pub fn lpp_log_min_product(w: Weights<'_>, orientation: Orientation) -> Result<f64> {
    let (r, c) = w.dims();
    check_nonempty(r, c)?;
    let rm = row_map(orientation, r);
    let mut neg = Grid::<f64>::new(r, c);
    for i in 0..r {
        for j in 0..c {
            let x = w.real(rm(i), j);
            if !(x >= 0.0) {
                return Err(Error::InvalidInput(format!("min-product weights must be >= 0, got {x}")));
            }
            neg.set(i, j, -x.ln());
        }
    }
    Ok(-dp_max_sum(r, c, |i, j| neg.get(i, j)))
}

/// Last-passage time of `field` under `mode`.
pub fn lpp_value<'a>(field: impl Into<Weights<'a>>, mode: PathMode) -> Result<LppValue> {
    let w = field.into();
    match (mode.combine, w) {
        (Combine::MaxSum, Weights::Int(g)) => lpp_max_sum(g, mode.orientation).map(LppValue::Int),
        (Combine::MaxSum, Weights::Real(g)) => {
            let (r, c) = (g.rows(), g.cols());
            check_nonempty(r, c)?;
            let rm = row_map(mode.orientation, r);
            Ok(LppValue::Real(dp_max_sum(r, c, |i, j| g.get(rm(i), j))))
        }
        (Combine::MinProduct, w) => lpp_log_min_product(w, mode.orientation).map(|l| LppValue::Real(l.exp())),
    }
}

/// Largest `M + N` accepted by [`lpp_oracle`].
pub const ORACLE_MAX_PERIMETER: usize = 18;

/// Exhaustive optimum over every monotone path, with products taken directly.
pub fn lpp_oracle<'a>(field: impl Into<Weights<'a>>, mode: PathMode) -> Result<LppValue> {
    let w = field.into();
    let (r, c) = w.dims();
    check_nonempty(r, c)?;
    if r + c > ORACLE_MAX_PERIMETER {
        return Err(Error::BudgetExceeded(format!("oracle limited to M+N <= {ORACLE_MAX_PERIMETER}")));
    }
    let (start, up) = match mode.orientation {
        Orientation::DownLeft => (0, false),
        Orientation::DownRight => (r - 1, true),
    };
    let mut paths = Vec::new();
    walk(start, 0, r, c, up, &mut Vec::with_capacity(r + c - 1), &mut paths);
    Ok(match (mode.combine, w) {
        (Combine::MaxSum, Weights::Int(g)) => {
            LppValue::Int(paths.iter().map(|p| p.iter().map(|&(i, j)| g.get(i, j)).sum::<u64>()).max().unwrap_or(0))
        }
        (Combine::MaxSum, _) => LppValue::Real(
            paths.iter().map(|p| p.iter().map(|&(i, j)| w.real(i, j)).sum::<f64>()).fold(f64::NEG_INFINITY, f64::max),
        ),
        (Combine::MinProduct, _) => LppValue::Real(
            paths.iter().map(|p| p.iter().map(|&(i, j)| w.real(i, j)).product::<f64>()).fold(f64::INFINITY, f64::min),
        ),
    })
}

fn walk(
    i: usize,
    j: usize,
    r: usize,
    c: usize,
    up: bool,
    path: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    path.push((i, j));
    let end_i = if up { 0 } else { r - 1 };
    if i == end_i && j == c - 1 {
        out.push(path.clone());
    } else {
        if i != end_i {
            let ni = if up { i - 1 } else { i + 1 };
            walk(ni, j, r, c, up, path, out);
        }
        if j + 1 < c {
            walk(i, j + 1, r, c, up, path, out);
        }
    }
    path.pop();
}
