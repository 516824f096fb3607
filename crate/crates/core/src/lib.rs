//! Numerical workbench for Muttalib–Borodin plane partitions and
//! last-passage percolation.
//!
//! The crate samples the inhomogeneous geometric and power weight fields,
//! computes the associated last-passage times, maps weight matrices to
//! plane partitions by RSK and Burge insertion, evaluates the exact
//! plane-partition measure and its Schur-measure marginal, and computes the
//! correlation kernels and Fredholm determinants that describe the limiting
//! distributions (Gumbel, hard-edge Bessel, Tracy–Widom).
//!
//! Module map:
//!
//! | module        | contents                                                   |
//! |---------------|------------------------------------------------------------|
//! | [`fields`]     | parameters, geometric and power weight fields              |
//! | [`lpp`]        | last-passage times by dynamic programming and enumeration  |
//! | [`tableaux`]   | partitions, plane partitions, RSK and Burge insertion      |
//! | [`exact`]      | exact measure, partition function, Schur functions         |
//! | [`specfun`]    | log-Gamma, q-Pochhammer, dilogarithm, Bessel, Airy         |
//! | [`kernels`]    | discrete, hard-edge, Bessel, finite-size and Airy kernels  |
//! | [`fredholm`]   | Fredholm determinants (discrete, Nyström, series oracle)   |
//! | [`asymptotics`]| scaling maps, saddle-point constants, limit distributions  |
//! | [`harness`]    | Monte Carlo runner, KS statistics, experiments             |
//! | [`cli`]        | the `mbl` command-line front end                           |

// `!(x > 0.0)` is the idiom used throughout to reject NaN along with the range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod exact;
pub mod fields;
pub mod fredholm;
pub mod harness;
pub mod kernels;
pub mod lpp;
pub mod quad;
pub mod specfun;
pub mod tableaux;

pub use error::{Error, Result};
pub use fields::{Extent, GeomField, ModelParams, PowField, RandomSeed};
