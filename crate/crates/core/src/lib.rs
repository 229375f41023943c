//! Generalized gcd-sum functions and the machinery around them.
//!
//! * [`arith`]: gcd, primality, factorization, sieves.
//! * [`multfun`]: multiplicative functions from prime-power evaluators.
//! * [`gcdsum`]: `A_r(n)` by three algorithms, `B_r(n)` and Menon sums.
//! * [`dirichlet`]: convolution algebra, the factor `f_r` and its inverse.
//! * [`analytic`]: sieved summatory scans, main-term fits, extremal statistic.
//! * [`igusa`]: Hurwitz zeta and the multivariable Igusa zeta of `Z/nZ`.

pub mod analytic;
pub mod arith;
pub mod dirichlet;
pub mod error;
pub mod gcdsum;
pub mod igusa;
pub mod multfun;

pub use arith::{ExactRational, FactoredInteger, SpfTable};
pub use error::{Error, Result};
