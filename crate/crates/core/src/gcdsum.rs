//! The normalized gcd-sum `A_r(n)` and its Menon-type companion `B_r(n)`.
//!
//! `A_r(n) = n^{-r} * sum_{k_1..k_r = 1..n} gcd(k_1 * ... * k_r, n)` is
//! computed three ways: by enumeration (the oracle), by the prime-power
//! product formula, and by the divisor-sum recursion
//! `A_r(n) = sum_{d | n} phi(d)/d * A_{r-1}(d)`.
//!
//! `B_r(n)` sums `gcd(k_1 * ... * k_r - 1, n)` over tuples of units mod n and
//! has the closed form `phi(n)^r * tau(n)`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, gcd, gcd_unchecked, rational_int, ExactRational, FactoredInteger};
use crate::error::{Error, Result};

/// Upper bound on enumerated tuples for the brute-force routines.
pub const MAX_TUPLES: u128 = 100_000_000;

/// Upper bound on `n` for the single-sum enumerations (Menon sums, progression counts).
pub const MAX_LINEAR_TERMS: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Bruteforce,
    LocalFormula,
    Recursion,
}

/// A value of `A_r(n)` tagged with the algorithm that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GcdSumValue {
    pub n: u64,
    pub r: u32,
    pub value: ExactRational,
    pub method: Method,
}

impl GcdSumValue {
    pub fn compute(n: u64, r: u32, method: Method) -> Result<Self> {
        let value = match method {
            Method::Bruteforce => a_bruteforce(n, r)?,
            Method::LocalFormula => a_eval(n, r)?,
            Method::Recursion => a_recursion(n, r)?,
        };
        Ok(GcdSumValue { n, r, value, method })
    }

    /// The unnormalized sum `n^r * A_r(n)`, always an integer.
    pub fn raw_sum(&self) -> BigInt {
        let scaled = &self.value * rational_int(BigInt::from(self.n).pow(self.r));
        debug_assert!(scaled.is_integer());
        scaled.to_integer()
    }
}

fn check_positive(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::domain("n must be positive"))
    } else {
        Ok(())
    }
}

fn tuple_guard(what: &str, base: u64, r: u32) -> Result<()> {
    let needed = (base as u128).checked_pow(r).unwrap_or(u128::MAX);
    if needed > MAX_TUPLES {
        return Err(Error::resource(what, needed, MAX_TUPLES));
    }
    Ok(())
}

/// Histogram of `k_1 * ... * k_r mod n` with every `k_i` drawn from `residues`.
fn product_distribution(n: u64, r: u32, residues: &[u64]) -> Vec<u128> {
    let n_us = n as usize;
    let mut counts = vec![0u128; n_us];
    counts[(1 % n) as usize] = 1;
    for _ in 0..r {
        let mut next = vec![0u128; n_us];
        for (c, &cnt) in counts.iter().enumerate() {
            if cnt == 0 {
                continue;
            }
            for &k in residues {
                next[((c as u64 * k) % n) as usize] += cnt;
            }
        }
        counts = next;
    }
    counts
}

/// `A_r(n)` by enumeration, aggregated over the residue distribution of the
/// product so the cost is `O(r n^2)` rather than `O(n^r)`.
pub fn a_bruteforce(n: u64, r: u32) -> Result<ExactRational> {
    check_positive(n)?;
    if r == 0 {
        return Ok(ExactRational::one());
    }
    tuple_guard("gcd-sum tuples", n, r)?;
    let residues: Vec<u64> = (1..=n).collect();
    let counts = product_distribution(n, r, &residues);
    let total: BigInt = counts
        .iter()
        .enumerate()
        .map(|(c, &cnt)| BigInt::from(cnt) * gcd_unchecked(c as u64, n))
        .sum();
    Ok(ExactRational::new(total, BigInt::from(n).pow(r)))
}

/// Literal r-fold loop over all tuples. Only for cross-checking
/// [`a_bruteforce`] on small inputs.
pub fn a_bruteforce_naive(n: u64, r: u32) -> Result<ExactRational> {
    check_positive(n)?;
    tuple_guard("gcd-sum tuples", n, r)?;
    let mut total: u128 = 0;
    let mut tuple = vec![1u64; r as usize];
    loop {
        let prod = tuple.iter().fold(1u64 % n, |acc, &k| acc * k % n);
        total += gcd_unchecked(prod, n) as u128;
        // odometer increment
        let mut i = 0;
        while i < tuple.len() && tuple[i] == n {
            tuple[i] = 1;
            i += 1;
        }
        if i == tuple.len() {
            break;
        }
        tuple[i] += 1;
    }
    Ok(ExactRational::new(BigInt::from(total), BigInt::from(n).pow(r)))
}

/// Local factor at `p^k`: `sum_{j=0}^r C(k+j-1, j) (1 - 1/p)^j`.
pub fn a_local(p: u64, k: u32, r: u32) -> ExactRational {
    // over the common denominator p^r: sum_j C(k+j-1, j) (p-1)^j p^(r-j)
    let (pb, qb) = (BigInt::from(p), BigInt::from(p - 1));
    let mut binom = BigInt::one();
    let mut q_pow = BigInt::one();
    let mut numer = BigInt::zero();
    for j in 0..=r {
        if j > 0 {
            binom = binom * BigInt::from(k + j - 1) / BigInt::from(j);
            q_pow *= &qb;
        }
        numer += &binom * &q_pow * (&pb).pow(r - j);
    }
    ExactRational::new(numer, (&pb).pow(r))
}

pub fn a_eval_factored(n: &FactoredInteger, r: u32) -> ExactRational {
    n.factors()
        .iter()
        .fold(ExactRational::one(), |acc, &(p, k)| acc * a_local(p, k, r))
}

/// `A_r(n)` from the prime-power product formula.
pub fn a_eval(n: u64, r: u32) -> Result<ExactRational> {
    check_positive(n)?;
    Ok(a_eval_factored(&factorize(n)?, r))
}

/// `A_r(n)` from the divisor-sum recursion, one memo table per level over
/// the divisors of `n`.
pub fn a_recursion(n: u64, r: u32) -> Result<ExactRational> {
    check_positive(n)?;
    let fact = factorize(n)?;
    let divisors = fact.divisors();
    let index: HashMap<u64, usize> = divisors.iter().enumerate().map(|(i, &d)| (d, i)).collect();

    // phi(d)/d and the divisor lists of each d, both reused at every level
    let phi_bar: Vec<ExactRational> = divisors
        .iter()
        .map(|&d| {
            let f = factorize(d).expect("divisor is positive");
            f.factors().iter().fold(ExactRational::one(), |acc, &(p, _)| {
                acc * ExactRational::new(BigInt::from(p - 1), BigInt::from(p))
            })
        })
        .collect();
    let sub_divisors: Vec<Vec<usize>> = divisors
        .iter()
        .map(|&d| {
            divisors
                .iter()
                .take_while(|&&e| e <= d)
                .filter(|&&e| d % e == 0)
                .map(|e| index[e])
                .collect()
        })
        .collect();

    let mut level = vec![ExactRational::one(); divisors.len()];
    for _ in 0..r {
        level = sub_divisors
            .iter()
            .map(|subs| {
                subs.iter()
                    .fold(ExactRational::zero(), |acc, &e| acc + &phi_bar[e] * &level[e])
            })
            .collect();
    }
    Ok(level[index[&n]].clone())
}

fn units_mod(n: u64) -> Vec<u64> {
    (1..=n).filter(|&k| gcd_unchecked(k, n) == 1).collect()
}

fn totient(n: &FactoredInteger) -> u64 {
    n.factors()
        .iter()
        .fold(1u64, |acc, &(p, k)| acc * (p - 1) * p.pow(k - 1))
}

/// `B_r(n)` by enumeration over unit tuples, aggregated by residue class of
/// the product. Uses `gcd(0, n) = n`.
pub fn b_bruteforce(n: u64, r: u32) -> Result<BigInt> {
    check_positive(n)?;
    if r == 0 {
        return Err(Error::domain("B_r is defined for r >= 1"));
    }
    let phi = totient(&factorize(n)?);
    tuple_guard("unit tuples", phi, r)?;
    let counts = product_distribution(n, r, &units_mod(n));
    Ok(counts
        .iter()
        .enumerate()
        .map(|(c, &cnt)| BigInt::from(cnt) * gcd_unchecked((c as u64 + n - 1) % n, n))
        .sum())
}

/// Literal loop over unit tuples; cross-check for [`b_bruteforce`].
pub fn b_bruteforce_naive(n: u64, r: u32) -> Result<BigInt> {
    check_positive(n)?;
    if r == 0 {
        return Err(Error::domain("B_r is defined for r >= 1"));
    }
    let units = units_mod(n);
    tuple_guard("unit tuples", units.len() as u64, r)?;
    let mut idx = vec![0usize; r as usize];
    let mut total: u128 = 0;
    loop {
        let prod = idx.iter().fold(1u64 % n, |acc, &i| acc * units[i] % n);
        total += gcd_unchecked((prod + n - 1) % n, n) as u128;
        let mut i = 0;
        while i < idx.len() && idx[i] + 1 == units.len() {
            idx[i] = 0;
            i += 1;
        }
        if i == idx.len() {
            break;
        }
        idx[i] += 1;
    }
    Ok(BigInt::from(total))
}

/// Closed form `phi(n)^r * tau(n)`.
pub fn b_closed(n: u64, r: u32) -> Result<BigInt> {
    check_positive(n)?;
    if r == 0 {
        return Err(Error::domain("B_r is defined for r >= 1"));
    }
    let f = factorize(n)?;
    let tau: u64 = f.factors().iter().map(|&(_, k)| k as u64 + 1).product();
    Ok(BigInt::from(totient(&f)).pow(r) * tau)
}

/// `sum_{1 <= k <= n, gcd(k, n) = 1} gcd(a k - 1, n)` for a unit `a`.
pub fn menon_sum(n: u64, a: i64) -> Result<u128> {
    check_positive(n)?;
    if n > MAX_LINEAR_TERMS {
        return Err(Error::resource("menon sum terms", n as u128, MAX_LINEAR_TERMS as u128));
    }
    let a_mod = (a as i128).rem_euclid(n as i128) as u64;
    if gcd(a_mod, n)? != 1 {
        return Err(Error::domain(format!("a = {a} is not a unit modulo {n}")));
    }
    Ok((1..=n)
        .filter(|&k| gcd_unchecked(k, n) == 1)
        .map(|k| {
            let ak = ((a_mod as u128 * k as u128) % n as u128) as u64;
            gcd_unchecked((ak + n - 1) % n, n) as u128
        })
        .sum())
}

/// `#{1 <= k <= n : k = x (mod d), gcd(k, n) = 1}` by direct count.
pub fn coprime_progression_count(n: u64, d: u64, x: u64) -> Result<u64> {
    check_positive(n)?;
    if d == 0 || n % d != 0 {
        return Err(Error::domain(format!("{d} does not divide {n}")));
    }
    if x == 0 || x > d {
        return Err(Error::domain(format!("residue {x} outside 1..={d}")));
    }
    if gcd(x, d)? != 1 {
        return Err(Error::domain(format!("gcd({x}, {d}) != 1")));
    }
    if n > MAX_LINEAR_TERMS {
        return Err(Error::resource("progression terms", n as u128, MAX_LINEAR_TERMS as u128));
    }
    Ok((x..=n)
        .step_by(d as usize)
        .filter(|&k| gcd_unchecked(k, n) == 1)
        .count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational;
    use crate::multfun::standard;

    fn q(a: i64, b: i64) -> ExactRational {
        rational(a, b)
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(a_bruteforce(2, 1).unwrap(), q(3, 2));
        assert_eq!(a_bruteforce(1, 5).unwrap(), q(1, 1));
        assert_eq!(a_bruteforce(2, 2).unwrap(), q(7, 4));
        assert_eq!(a_bruteforce(7, 0).unwrap(), q(1, 1));
    }

    #[test]
    fn bruteforce_guard() {
        let err = a_bruteforce(101, 4).unwrap_err();
        assert!(matches!(err, Error::Resource { needed: 104_060_401, .. }), "{err}");
        assert!(a_bruteforce(0, 1).is_err());
    }

    #[test]
    fn aggregated_bruteforce_matches_naive_loop() {
        for n in 1..=30 {
            for r in 0..=3 {
                assert_eq!(a_bruteforce(n, r).unwrap(), a_bruteforce_naive(n, r).unwrap(), "n={n} r={r}");
            }
        }
        for n in 1..=12 {
            for r in 1..=3 {
                assert_eq!(b_bruteforce(n, r).unwrap(), b_bruteforce_naive(n, r).unwrap());
            }
        }
    }

    #[test]
    fn local_examples() {
        assert_eq!(a_local(2, 1, 1), q(3, 2));
        assert_eq!(a_local(2, 1, 2), q(7, 4));
        assert_eq!(a_local(101, 7, 0), q(1, 1));
    }

    #[test]
    fn eval_examples() {
        // A_1(12) = A_1(4) A_1(3) = 2 * 5/3
        assert_eq!(a_eval(12, 1).unwrap(), q(10, 3));
        assert_eq!(a_eval(12, 1).unwrap(), a_bruteforce(12, 1).unwrap());
        assert_eq!(a_eval(1, 7).unwrap(), q(1, 1));
        assert_eq!(a_eval(4, 1).unwrap(), q(2, 1));
    }

    #[test]
    fn recursion_examples() {
        assert_eq!(a_recursion(2, 1).unwrap(), q(3, 2));
        assert_eq!(a_recursion(2, 2).unwrap(), q(7, 4));
        for p in [2i64, 3, 5, 7, 97] {
            assert_eq!(a_recursion(p as u64, 1).unwrap(), q(2 * p - 1, p));
        }
    }

    #[test]
    fn three_way_agreement_small() {
        for n in 1..=60 {
            for r in 0..=2 {
                let brute = a_bruteforce(n, r).unwrap();
                assert_eq!(brute, a_eval(n, r).unwrap(), "n={n} r={r}");
                assert_eq!(brute, a_recursion(n, r).unwrap(), "n={n} r={r}");
            }
        }
    }

    #[test]
    fn gcd_sum_value_raw_sum() {
        let v = GcdSumValue::compute(12, 2, Method::Recursion).unwrap();
        let direct: u64 = (1..=12u64)
            .flat_map(|a| (1..=12u64).map(move |b| gcd_unchecked(a * b, 12)))
            .sum();
        assert_eq!(v.raw_sum(), BigInt::from(direct));
        assert!(v.value >= q(1, 1) && v.value <= q(12, 1));
    }

    #[test]
    fn a1_is_divisor_sum_of_phi_bar() {
        let phi = standard("phi").unwrap();
        for n in 1..=10_000u64 {
            let f = factorize(n).unwrap();
            let s = f
                .divisors()
                .into_iter()
                .fold(ExactRational::zero(), |acc, d| {
                    acc + phi.eval_u64(d).unwrap() / rational_int(d)
                });
            assert_eq!(a_eval(n, 1).unwrap(), s);
        }
    }

    #[test]
    fn dominated_by_piltz() {
        for r in 0..=4u32 {
            let tau = standard(&format!("tau_k({})", r + 1)).unwrap();
            for n in 1..=10_000u64 {
                let f = factorize(n).unwrap();
                let a = a_eval_factored(&f, r);
                let t = tau.eval(&f);
                assert!(a <= t, "n={n} r={r}");
                if r >= 1 {
                    assert_eq!(a == t, n == 1, "equality only at n = 1 (n={n} r={r})");
                }
            }
        }
    }

    #[test]
    fn monotone_in_r_and_tends_to_n() {
        for n in 1..=30u64 {
            let mut prev = a_eval(n, 0).unwrap();
            for r in 1..=200 {
                let cur = a_eval(n, r).unwrap();
                assert!(cur >= prev, "n={n} r={r}");
                prev = cur;
            }
            let gap = (rational_int(n) - &prev) / rational_int(n);
            assert!(gap >= ExactRational::zero());
            assert!(gap < q(1, 1000), "n={n}");
        }
    }

    #[test]
    fn squarefree_closed_form() {
        for n in 1..=10_000u64 {
            let f = factorize(n).unwrap();
            if !f.is_squarefree() {
                continue;
            }
            for r in 0..=4 {
                let expect = f.factors().iter().fold(ExactRational::one(), |acc, &(p, _)| {
                    let q1 = ExactRational::new(BigInt::from(p - 1), BigInt::from(p));
                    acc * rational_int(p) * (ExactRational::one() - q1.pow(r as i32 + 1))
                });
                assert_eq!(a_eval_factored(&f, r), expect);
            }
        }
    }

    #[test]
    fn b_examples() {
        assert_eq!(b_bruteforce(4, 1).unwrap(), BigInt::from(6));
        assert_eq!(b_bruteforce(3, 2).unwrap(), BigInt::from(8));
        assert_eq!(b_bruteforce(1, 3).unwrap(), BigInt::from(1));
        assert_eq!(b_closed(4, 1).unwrap(), BigInt::from(6));
        assert_eq!(b_closed(3, 2).unwrap(), BigInt::from(8));
        assert_eq!(b_closed(1, 9).unwrap(), BigInt::from(1));
        assert!(b_closed(5, 0).is_err());
        assert!(b_bruteforce(5, 0).is_err());
    }

    #[test]
    fn menon_examples() {
        assert_eq!(menon_sum(4, 1).unwrap(), 6);
        assert_eq!(menon_sum(5, 2).unwrap(), 8);
        assert_eq!(menon_sum(1, 1).unwrap(), 1);
        assert_eq!(menon_sum(5, -3).unwrap(), 8);
        assert!(matches!(menon_sum(6, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn progression_examples() {
        assert_eq!(coprime_progression_count(12, 4, 1).unwrap(), 2);
        assert_eq!(coprime_progression_count(6, 1, 1).unwrap(), 2);
        assert_eq!(coprime_progression_count(9, 3, 2).unwrap(), 3);
        assert!(coprime_progression_count(12, 5, 1).is_err());
        assert!(coprime_progression_count(12, 4, 2).is_err());
    }

    #[test]
    fn progression_count_is_phi_ratio() {
        for n in 1..=200u64 {
            let f = factorize(n).unwrap();
            let phi_n = totient(&f);
            for d in f.divisors() {
                let phi_d = totient(&factorize(d).unwrap());
                for x in (1..=d).filter(|&x| gcd_unchecked(x, d) == 1) {
                    assert_eq!(coprime_progression_count(n, d, x).unwrap(), phi_n / phi_d);
                }
            }
        }
    }
}
