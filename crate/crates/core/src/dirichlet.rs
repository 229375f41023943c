//! Dirichlet convolution on multiplicative functions and the correction
//! factor `f_r` with `A_r = tau_{r+1} * f_r`.
//!
//! All convolutions are evaluated prime power by prime power; a composite
//! argument is never expanded into its full divisor list.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{rational_int, ExactRational, FactoredInteger};
use crate::error::{Error, Result};
use crate::gcdsum::a_local;
use crate::multfun::{binomial, MultiplicativeFunction, StandardFunction};

/// Dirichlet convolution `(f * g)(n) = sum_{d | n} f(d) g(n/d)`.
pub fn convolve(f: &MultiplicativeFunction, g: &MultiplicativeFunction) -> MultiplicativeFunction {
    let (f, g) = (f.clone(), g.clone());
    MultiplicativeFunction::new(format!("{} * {}", f.name(), g.name()), move |p, k| {
        (0..=k).fold(ExactRational::zero(), |acc, i| acc + f.local(p, i) * g.local(p, k - i))
    })
}

pub fn convolve_eval(
    f: &MultiplicativeFunction,
    g: &MultiplicativeFunction,
    n: &FactoredInteger,
) -> ExactRational {
    convolve(f, g).eval(n)
}

/// Value of the Dirichlet inverse of `f` at `p^k`.
pub fn inverse_local(f: &MultiplicativeFunction, p: u64, k: u32) -> ExactRational {
    let f_vals: Vec<ExactRational> = (0..=k).map(|j| f.local(p, j)).collect();
    inverse_series(&f_vals)[k as usize].clone()
}

// g_0 = 1, g_k = -sum_{j=1}^k f_j g_{k-j}
fn inverse_series(f_vals: &[ExactRational]) -> Vec<ExactRational> {
    let mut g: Vec<ExactRational> = Vec::with_capacity(f_vals.len());
    g.push(ExactRational::one());
    for k in 1..f_vals.len() {
        let s = (1..=k).fold(ExactRational::zero(), |acc, j| acc + &f_vals[j] * &g[k - j]);
        g.push(-s);
    }
    g
}

/// The Dirichlet inverse as a multiplicative function.
pub fn inverse(f: &MultiplicativeFunction) -> MultiplicativeFunction {
    let f = f.clone();
    MultiplicativeFunction::new(format!("inv({})", f.name()), move |p, k| inverse_local(&f, p, k))
}

/// Integer polynomial in `u = 1/p`, coefficients from `u^0` upward.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalPolynomial {
    coefficients: Vec<BigInt>,
}

impl LocalPolynomial {
    pub fn zero() -> Self {
        LocalPolynomial {
            coefficients: Vec::new(),
        }
    }

    pub fn from_coefficients(mut coefficients: Vec<BigInt>) -> Self {
        while coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        LocalPolynomial { coefficients }
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn constant_term(&self) -> BigInt {
        self.coefficients.first().cloned().unwrap_or_default()
    }

    /// Evaluates at `u = 1/p` (Horner).
    pub fn eval_at_prime(&self, p: u64) -> ExactRational {
        let u = ExactRational::new(BigInt::one(), BigInt::from(p));
        self.coefficients
            .iter()
            .rev()
            .fold(ExactRational::zero(), |acc, c| acc * &u + rational_int(c.clone()))
    }

    /// Floating-point evaluation at `u = 1/p`.
    pub fn eval_f64(&self, p: f64) -> f64 {
        let u = 1.0 / p;
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * u + bigint_to_f64(c))
    }

    /// Sum of absolute values of the coefficients of `u^1` and above.
    pub fn abs_tail_sum(&self) -> BigInt {
        self.coefficients.iter().skip(1).map(|c| c.abs()).sum()
    }

    fn add_scaled(&mut self, other: &[BigInt], scale: &BigInt) {
        if self.coefficients.len() < other.len() {
            self.coefficients.resize(other.len(), BigInt::zero());
        }
        for (a, b) in self.coefficients.iter_mut().zip(other) {
            *a += b * scale;
        }
    }

    fn trimmed(self) -> Self {
        Self::from_coefficients(self.coefficients)
    }
}

impl fmt::Display for LocalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coefficients.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let body = match i {
                0 => mag.to_string(),
                1 if mag.is_one() => "u".to_string(),
                1 => format!("{mag}u"),
                _ if mag.is_one() => format!("u^{i}"),
                _ => format!("{mag}u^{i}"),
            };
            write!(f, "{body}")?;
        }
        Ok(())
    }
}

// Coefficients go out as decimal strings so JSON consumers never round them.
impl Serialize for LocalPolynomial {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.coefficients.iter().map(|c| c.to_string()))
    }
}

fn bigint_to_f64(c: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    c.to_f64().unwrap_or(f64::NAN)
}

/// Coefficients of `(1 - u)^j`.
fn one_minus_u_pow(j: u32) -> Vec<BigInt> {
    (0..=j)
        .map(|i| {
            let c = binomial(&BigInt::from(j), i);
            if i % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect()
}

/// `f_r(p^k)` as a polynomial in `u = 1/p`:
/// `sum_{j=0}^r (1-u)^j sum_{l=0}^k (-1)^l C(r+1, l) C(j+k-l-1, j)`.
pub fn f_r_local(r: u32, k: u32) -> Result<LocalPolynomial> {
    if r == 0 {
        return Err(Error::domain("f_r needs r >= 1"));
    }
    if k == 0 {
        return Ok(LocalPolynomial::from_coefficients(vec![BigInt::one()]));
    }
    let r1 = BigInt::from(r + 1);
    let mut poly = LocalPolynomial::zero();
    for j in 0..=r {
        let inner: BigInt = (0..=k)
            .map(|l| {
                let term = binomial(&r1, l) * binomial(&BigInt::from(j as i64 + k as i64 - l as i64 - 1), j);
                if l % 2 == 0 {
                    term
                } else {
                    -term
                }
            })
            .sum();
        if !inner.is_zero() {
            poly.add_scaled(&one_minus_u_pow(j), &inner);
        }
    }
    Ok(poly.trimmed())
}

/// `f_r` as a multiplicative function. Every prime power is expanded from
/// the defining sum; nothing assumes the vanishing for `k > r`.
pub fn f_r(r: u32) -> Result<MultiplicativeFunction> {
    if r == 0 {
        return Err(Error::domain("f_r needs r >= 1"));
    }
    Ok(MultiplicativeFunction::new(format!("f_{r}"), move |p, k| {
        f_r_local(r, k).expect("r >= 1").eval_at_prime(p)
    }))
}

/// Dirichlet inverse of `f_r`.
pub fn g_r(r: u32) -> Result<MultiplicativeFunction> {
    Ok(inverse(&f_r(r)?))
}

/// `f_r(p^k)` computed as `(A_r * mu^{(r+1)})(p^k)`, independently of the
/// polynomial expansion.
pub fn fr_as_convolution(r: u32, p: u64, k: u32) -> Result<ExactRational> {
    if r == 0 || k == 0 {
        return Err(Error::domain("fr_as_convolution needs r >= 1 and k >= 1"));
    }
    let mu = StandardFunction::MuIter(r + 1).build();
    Ok((0..=k).fold(ExactRational::zero(), |acc, l| acc + mu.local(p, l) * a_local(p, k - l, r)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrRow {
    pub k: u32,
    pub polynomial: LocalPolynomial,
}

/// Coefficient table of `f_r(p^k)` for `k = 1..=k_max`, all checks passed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrStructureReport {
    pub r: u32,
    pub k_max: u32,
    pub rows: Vec<FrRow>,
}

impl FrStructureReport {
    /// Flattened `(r, k, i, c_i)` records, one per stored coefficient. A zero
    /// polynomial still gets the single record `(r, k, 0, 0)`.
    pub fn csv_records(&self) -> Vec<(u32, u32, usize, BigInt)> {
        let mut out = Vec::new();
        for row in &self.rows {
            if row.polynomial.is_zero() {
                out.push((self.r, row.k, 0, BigInt::zero()));
            }
            for (i, c) in row.polynomial.coefficients().iter().enumerate() {
                out.push((self.r, row.k, i, c.clone()));
            }
        }
        out
    }
}

/// Checks the structure of `f_r(p^k)` for `k <= k_max`: zero for `k > r`,
/// vanishing constant term for `1 <= k <= r`, degree at most `r`.
pub fn verify_fr_structure(r: u32, k_max: u32) -> Result<FrStructureReport> {
    let mut rows = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let poly = f_r_local(r, k)?;
        if k > r && !poly.is_zero() {
            return Err(Error::Verification(format!("f_{r}(p^{k}) = {poly}, expected 0 (r={r}, k={k})")));
        }
        if !poly.constant_term().is_zero() {
            return Err(Error::Verification(format!(
                "f_{r}(p^{k}) has constant term {} (r={r}, k={k})",
                poly.constant_term()
            )));
        }
        if poly.degree().is_some_and(|d| d > r as usize) {
            return Err(Error::Verification(format!(
                "f_{r}(p^{k}) has degree {:?} > {r} (r={r}, k={k})",
                poly.degree()
            )));
        }
        rows.push(FrRow { k, polynomial: poly });
    }
    Ok(FrStructureReport { r, k_max, rows })
}

/// `sum_{l=0}^n (-1)^l l^j C(n, l)`, zero for `0 <= j < n`.
pub fn alternating_power_sum(n: u32, j: u32) -> BigInt {
    let nn = BigInt::from(n);
    (0..=n)
        .map(|l| {
            let term = BigInt::from(l).pow(j) * binomial(&nn, l);
            if l % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum()
}

/// Builds `A_r` by iterating `h -> (phi_bar . h) * 1` from the constant 1.
pub fn a_chained(r: u32) -> MultiplicativeFunction {
    let phi_bar = StandardFunction::PhiBar.build();
    let one = StandardFunction::One.build();
    (0..r).fold(one.clone(), |h, _| convolve(&phi_bar.pointwise(&h), &one))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Convolution,
    Inverse,
}

/// Two multiplicative functions and the relation claimed between them.
#[derive(Clone, Debug)]
pub struct DirichletPair {
    pub f: MultiplicativeFunction,
    pub g: MultiplicativeFunction,
    pub relation: Relation,
}

impl DirichletPair {
    pub fn inverse_of(f: MultiplicativeFunction) -> Self {
        let g = inverse(&f);
        DirichletPair {
            f,
            g,
            relation: Relation::Inverse,
        }
    }

    /// For an inverse pair, checks `(f * g)(p^k) = [k = 0]` for `k <= depth`
    /// at every listed prime.
    pub fn verify(&self, depth: u32, primes: &[u64]) -> Result<()> {
        if self.relation != Relation::Inverse {
            return Ok(());
        }
        let conv = convolve(&self.f, &self.g);
        for &p in primes {
            for k in 0..=depth {
                let v = conv.local(p, k);
                let expected = if k == 0 { ExactRational::one() } else { ExactRational::zero() };
                if v != expected {
                    return Err(Error::Verification(format!(
                        "({} * {})({p}^{k}) = {v}",
                        self.f.name(),
                        self.g.name()
                    )));
                }
            }
        }
        Ok(())
    }
}
