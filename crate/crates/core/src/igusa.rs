//! Hurwitz zeta and the multivariable Igusa zeta function of `Z/nZ`,
//! `Z(s_1..s_r) = sum_{m_1..m_r >= 1} gcd(m_1 ... m_r, n) / (m_1^{s_1} ... m_r^{s_r})`,
//! for real `s_j > 1`.
//!
//! Two independent evaluations are provided: a truncated direct sum with a
//! rigorous tail bound, and the finite Hurwitz representation
//! `n^{-(s_1+..+s_r)} sum_{k in [1, n]^r} gcd(k_1...k_r, n) prod_j zeta(s_j, k_j/n)`.

use serde::{Deserialize, Serialize};

use crate::analytic::CompensatedSum;
use crate::arith::gcd_unchecked;
use crate::error::{Error, Result};

/// `B_2, B_4, ..., B_18`.
const BERNOULLI: [f64; 9] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
];

/// Bernoulli terms used in the Euler-Maclaurin correction.
pub const BERNOULLI_TERMS: usize = 8;

/// Cap on the number of explicitly summed Hurwitz terms.
pub const MAX_HURWITZ_CUTOFF: u64 = 1 << 20;

/// Cap on `n^r` for the Hurwitz representation.
pub const MAX_HURWITZ_TUPLES: u128 = 10_000_000;

/// Cap on `r * truncation` for the direct sum.
pub const MAX_DIRECT_WORK: u128 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HurwitzParams {
    pub s: f64,
    pub a: f64,
    pub tolerance: f64,
}

/// `zeta(s, a) = sum_{m >= 0} (m + a)^{-s}` to absolute `tolerance`.
pub fn hurwitz_zeta(params: HurwitzParams) -> Result<f64> {
    let HurwitzParams { s, a, tolerance } = params;
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::domain(format!("Hurwitz zeta needs real s > 1, got {s}")));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::domain(format!("Hurwitz zeta needs 0 < a <= 1, got {a}")));
    }
    if !(tolerance > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }

    let mut cutoff: u64 = 8;
    loop {
        let base = cutoff as f64 + a;
        let (correction, bound) = euler_maclaurin_tail(s, base);
        if bound < tolerance {
            let mut acc = CompensatedSum::default();
            // small terms first
            for m in (0..cutoff).rev() {
                acc.add((m as f64 + a).powf(-s));
            }
            acc.add(correction);
            let value = acc.value();
            if 4.0 * f64::EPSILON * value.abs() * (cutoff as f64).log2().max(1.0) > tolerance {
                return Err(Error::numerical(format!(
                    "tolerance {tolerance:e} is below the rounding floor for zeta({s}, {a}) = {value}"
                )));
            }
            return Ok(value);
        }
        cutoff *= 2;
        if cutoff > MAX_HURWITZ_CUTOFF {
            return Err(Error::numerical(format!(
                "zeta({s}, {a}) cannot reach tolerance {tolerance:e} with {BERNOULLI_TERMS} Bernoulli terms"
            )));
        }
    }
}

/// Euler-Maclaurin estimate of `sum_{m >= 0} (base + m)^{-s}` and the size
/// of the first omitted correction term, which bounds the remainder for real `s`.
fn euler_maclaurin_tail(s: f64, base: f64) -> (f64, f64) {
    let mut total = base.powf(1.0 - s) / (s - 1.0) + 0.5 * base.powf(-s);
    // coefficient s(s+1)...(s+2j-2) / (2j)! times base^{-s-2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut power = base.powf(-s - 1.0);
    let inv_sq = 1.0 / (base * base);
    let mut next = 0.0;
    for (j, &b) in BERNOULLI.iter().enumerate() {
        let term = b / fact * rising * power;
        if j < BERNOULLI_TERMS {
            total += term;
        } else {
            next = term.abs();
            break;
        }
        let two_j = 2.0 * (j as f64 + 1.0);
        rising *= (s + two_j - 1.0) * (s + two_j);
        fact *= (two_j + 1.0) * (two_j + 2.0);
        power *= inv_sq;
    }
    (total, next)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IgusaMethod {
    Hurwitz,
    Direct,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IgusaQuery {
    pub n: u64,
    pub s: Vec<f64>,
    pub method: IgusaMethod,
    pub tolerance: f64,
}

impl IgusaQuery {
    pub fn new(n: u64, s: Vec<f64>, method: IgusaMethod) -> Self {
        IgusaQuery {
            n,
            s,
            method,
            tolerance: 1e-10,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("n must be positive"));
        }
        if self.s.is_empty() {
            return Err(Error::domain("s must have at least one component"));
        }
        if let Some(bad) = self.s.iter().find(|&&v| !(v > 1.0) || !v.is_finite()) {
            return Err(Error::domain(format!("every s_j must be a real > 1, got {bad}")));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::domain("tolerance must be positive"));
        }
        Ok(())
    }

    pub fn r(&self) -> usize {
        self.s.len()
    }
}

/// Result record; serializes to the CLI's JSON shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IgusaValue {
    pub n: u64,
    pub s: Vec<f64>,
    pub method: IgusaMethod,
    pub value: f64,
    pub tail_bound: f64,
    pub terms_evaluated: u128,
}

/// Sums `gcd(c_1 ... c_r, n) * prod_j weights[j][c_j]` over all residue
/// tuples, `c_j` in `0..n` (residue 0 standing for `n`).
fn residue_tuple_sum(n: u64, weights: &[Vec<f64>]) -> f64 {
    let r = weights.len();
    let n_us = n as usize;
    let mut idx = vec![0usize; r];
    let mut acc = CompensatedSum::default();
    loop {
        let mut prod_res = 1 % n;
        let mut w = 1.0;
        for (j, &c) in idx.iter().enumerate() {
            prod_res = prod_res * c as u64 % n;
            w *= weights[j][c];
        }
        acc.add(gcd_unchecked(prod_res, n) as f64 * w);
        let mut j = 0;
        while j < r && idx[j] + 1 == n_us {
            idx[j] = 0;
            j += 1;
        }
        if j == r {
            break;
        }
        idx[j] += 1;
    }
    acc.value()
}

/// Direct sum over `m_j <= truncation`, regrouped by `m_j mod n` since the
/// gcd weight only depends on the residues.
///
/// The tail bound uses `gcd <= n` and `sum_{m > T} m^{-s} <= T^{1-s}/(s-1)`.
pub fn igusa_direct(query: &IgusaQuery, truncation: u64) -> Result<IgusaValue> {
    query.validate()?;
    let r = query.r();
    if r > 3 {
        return Err(Error::domain(format!("direct evaluation supports r <= 3, got {r}")));
    }
    if truncation < query.n {
        return Err(Error::domain(format!(
            "truncation {truncation} must be at least n = {}",
            query.n
        )));
    }
    let work = r as u128 * truncation as u128;
    if work > MAX_DIRECT_WORK {
        return Err(Error::resource("direct Igusa terms", work, MAX_DIRECT_WORK));
    }
    let tuples = (query.n as u128).pow(r as u32);
    if tuples > MAX_HURWITZ_TUPLES {
        return Err(Error::resource("residue tuples", tuples, MAX_HURWITZ_TUPLES));
    }

    let n = query.n;
    let mut class_sums: Vec<Vec<f64>> = Vec::with_capacity(r);
    let mut partial = Vec::with_capacity(r);
    let mut tails = Vec::with_capacity(r);
    for &s in &query.s {
        let mut classes = vec![CompensatedSum::default(); n as usize];
        // descending m so each class accumulates small terms first
        for m in (1..=truncation).rev() {
            classes[(m % n) as usize].add((m as f64).powf(-s));
        }
        let sums: Vec<f64> = classes.iter().map(CompensatedSum::value).collect();
        partial.push(sums.iter().sum::<f64>());
        tails.push((truncation as f64).powf(1.0 - s) / (s - 1.0));
        class_sums.push(sums);
    }
    let value = residue_tuple_sum(n, &class_sums);

    let full: f64 = partial.iter().zip(&tails).map(|(p, t)| p + t).product();
    let kept: f64 = partial.iter().product();
    let rounding = 16.0 * f64::EPSILON * value.abs() * (truncation as f64).log2();
    Ok(IgusaValue {
        n,
        s: query.s.clone(),
        method: IgusaMethod::Direct,
        value,
        tail_bound: n as f64 * (full - kept) + rounding,
        terms_evaluated: (truncation as u128).pow(r as u32),
    })
}

/// Finite Hurwitz-zeta representation with `k_j` running over `1..=n`.
pub fn igusa_hurwitz(query: &IgusaQuery) -> Result<IgusaValue> {
    query.validate()?;
    let r = query.r();
    let n = query.n;
    let tuples = (n as u128).checked_pow(r as u32).unwrap_or(u128::MAX);
    if tuples > MAX_HURWITZ_TUPLES {
        return Err(Error::resource("Hurwitz tuples", tuples, MAX_HURWITZ_TUPLES));
    }
    // each factor to relative accuracy rel, so the sum is good to about r * rel
    let rel = query.tolerance * 1e-3;
    let nf = n as f64;
    let mut weights: Vec<Vec<f64>> = Vec::with_capacity(r);
    for &s in &query.s {
        let mut w = vec![0.0; n as usize];
        for k in 1..=n {
            let a = k as f64 / nf;
            let z = hurwitz_zeta(HurwitzParams {
                s,
                a,
                tolerance: rel * a.powf(-s),
            })?;
            w[(k % n) as usize] = z;
        }
        weights.push(w);
    }
    let scale = nf.powf(-query.s.iter().sum::<f64>());
    let value = scale * residue_tuple_sum(n, &weights);
    Ok(IgusaValue {
        n,
        s: query.s.clone(),
        method: IgusaMethod::Hurwitz,
        value,
        tail_bound: r as f64 * rel * value.abs() + 8.0 * f64::EPSILON * value.abs(),
        terms_evaluated: tuples,
    })
}

/// Dispatches on `query.method`; `truncation` applies to the direct method.
pub fn igusa_evaluate(query: &IgusaQuery, truncation: u64) -> Result<IgusaValue> {
    match query.method {
        IgusaMethod::Hurwitz => igusa_hurwitz(query),
        IgusaMethod::Direct => igusa_direct(query, truncation),
    }
}
