//! Integer foundations: gcd, primality, factorization and sieves.
//!
//! Everything downstream evaluates multiplicative functions on a
//! [`FactoredInteger`], so factorization is the single entry point from a
//! plain integer into the rest of the crate. Small inputs are handled by
//! trial division over a cached prime table; larger cofactors fall back to
//! Brent's variant of Pollard rho with a deterministic Miller-Rabin test.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational carrier used for every identity check.
///
/// `BigRational` keeps values in lowest terms with a positive denominator.
pub type ExactRational = BigRational;

/// Primes up to this bound are used for trial division before rho.
pub const TRIAL_DIVISION_LIMIT: u32 = 1_000_000;

/// Largest table an [`SpfTable`] will allocate (entries, not bytes).
pub const MAX_SIEVE_LIMIT: u64 = 1 << 31;

pub fn rational(num: i64, den: i64) -> ExactRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_int(v: impl Into<BigInt>) -> ExactRational {
    BigRational::from_integer(v.into())
}

/// Greatest common divisor with the convention `gcd(0, n) = n`.
pub fn gcd(a: u64, b: u64) -> Result<u64> {
    if a == 0 && b == 0 {
        return Err(Error::domain("gcd(0, 0) is undefined"));
    }
    Ok(gcd_unchecked(a, b))
}

/// Binary gcd; returns 0 for `(0, 0)`. Hot loops call this directly.
#[inline]
pub fn gcd_unchecked(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

/// A positive integer together with its canonical prime factorization.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactoredInteger {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    pub fn one() -> Self {
        FactoredInteger {
            value: 1,
            factors: Vec::new(),
        }
    }

    /// Builds from `(prime, exponent)` pairs, checking the invariants.
    pub fn from_factors(mut factors: Vec<(u64, u32)>) -> Result<Self> {
        factors.sort_unstable();
        let mut value: u64 = 1;
        for (i, &(p, k)) in factors.iter().enumerate() {
            if k == 0 {
                return Err(Error::domain(format!("zero exponent for prime {p}")));
            }
            if !is_prime(p) {
                return Err(Error::domain(format!("{p} is not prime")));
            }
            if i > 0 && factors[i - 1].0 == p {
                return Err(Error::domain(format!("prime {p} listed twice")));
            }
            let pk = p
                .checked_pow(k)
                .and_then(|pk| value.checked_mul(pk))
                .ok_or_else(|| Error::domain("factored value exceeds 64 bits"))?;
            value = pk;
        }
        Ok(FactoredInteger { value, factors })
    }

    pub fn prime_power(p: u64, k: u32) -> Result<Self> {
        Self::from_factors(vec![(p, k)])
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Number of distinct prime divisors. Additive, so it lives here rather
    /// than among the multiplicative functions.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, k)| k == 1)
    }

    /// All positive divisors in ascending order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, k) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..k {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

impl fmt::Display for FactoredInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|&(p, k)| if k == 1 { p.to_string() } else { format!("{p}^{k}") })
            .collect();
        write!(f, "{}", parts.join(" * "))
    }
}

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| eratosthenes(TRIAL_DIVISION_LIMIT as u64))
}

/// Plain sieve of Eratosthenes returning all primes `<= limit`.
fn eratosthenes(limit: u64) -> Vec<u32> {
    let limit = limit as usize;
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut i = 2;
    while i * i <= limit {
        if !composite[i] {
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    (2..=limit)
        .filter(|&i| !composite[i])
        .map(|i| i as u32)
        .collect()
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's cycle-finding rho; returns a nontrivial factor of composite `n`.
fn pollard_brent(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    // Fixed sequence of constants keeps factorization deterministic.
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut ys) = (2u64, 2u64, 2u64);
        let mut q = 1u64;
        let mut g = 1u64;
        let mut r = 1u64;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd_unchecked(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_unchecked(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!("rho exhausted constants")
}

fn split_large(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    split_large(d, out);
    split_large(n / d, out);
}

/// Canonical factorization of `n >= 1`.
pub fn factorize(n: u64) -> Result<FactoredInteger> {
    if n == 0 {
        return Err(Error::domain("cannot factor 0"));
    }
    let mut rest = n;
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for &p in small_primes() {
        let p = p as u64;
        if p * p > rest {
            break;
        }
        if rest % p == 0 {
            let mut k = 0;
            while rest % p == 0 {
                rest /= p;
                k += 1;
            }
            factors.push((p, k));
        }
    }
    if rest > 1 {
        let mut large = Vec::new();
        split_large(rest, &mut large);
        large.sort_unstable();
        for q in large {
            match factors.last_mut() {
                Some((p, k)) if *p == q => *k += 1,
                _ => factors.push((q, 1)),
            }
        }
    }
    Ok(FactoredInteger { value: n, factors })
}

/// Smallest-prime-factor table for `2..=limit`.
#[derive(Clone, Debug)]
pub struct SpfTable {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl SpfTable {
    /// Linear sieve. Refuses limits above [`MAX_SIEVE_LIMIT`].
    pub fn build(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::domain(format!("sieve limit must be >= 2, got {limit}")));
        }
        if limit > MAX_SIEVE_LIMIT {
            return Err(Error::resource("spf sieve entries", limit as u128, MAX_SIEVE_LIMIT as u128));
        }
        let len = limit as usize + 1;
        let mut spf = vec![0u32; len];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..len {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let m = i * p as usize;
                if p > si || m >= len {
                    break;
                }
                spf[m] = p;
            }
        }
        Ok(SpfTable { limit, spf, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `i` for `2 <= i <= limit`.
    #[inline]
    pub fn spf(&self, i: u64) -> u64 {
        self.spf[i as usize] as u64
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn is_prime(&self, i: u64) -> bool {
        i >= 2 && i <= self.limit && self.spf(i) == i
    }

    /// Calls `visit(p, k)` for each prime power exactly dividing `n`, in
    /// ascending order of `p`.
    #[inline]
    pub fn for_each_prime_power(&self, mut n: u64, mut visit: impl FnMut(u64, u32)) {
        debug_assert!(n >= 1 && n <= self.limit);
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            visit(p, k);
        }
    }

    pub fn factorize(&self, n: u64) -> Result<FactoredInteger> {
        if n == 0 || n > self.limit {
            return Err(Error::domain(format!("{n} outside sieve range 1..={}", self.limit)));
        }
        let mut factors = Vec::new();
        self.for_each_prime_power(n, |p, k| factors.push((p, k)));
        Ok(FactoredInteger { value: n, factors })
    }
}

/// Primes `p` with `lo < p <= hi`, ascending.
pub fn primes_in_range(lo: u64, hi: u64) -> Result<Vec<u64>> {
    if lo == 0 {
        return Err(Error::domain("lower bound must be >= 1"));
    }
    if lo > hi {
        return Err(Error::domain(format!("empty range: lo={lo} > hi={hi}")));
    }
    if hi > MAX_SIEVE_LIMIT {
        return Err(Error::resource("prime range sieve", hi as u128, MAX_SIEVE_LIMIT as u128));
    }
    if hi <= TRIAL_DIVISION_LIMIT as u64 {
        let ps = small_primes();
        let start = ps.partition_point(|&p| (p as u64) <= lo);
        let end = ps.partition_point(|&p| (p as u64) <= hi);
        return Ok(ps[start..end].iter().map(|&p| p as u64).collect());
    }
    Ok(eratosthenes(hi)
        .into_iter()
        .map(u64::from)
        .filter(|&p| p > lo)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(6, 4).unwrap(), 2);
        assert_eq!(gcd(0, 4).unwrap(), 4);
        assert_eq!(gcd(12, 18).unwrap(), 6);
        assert!(matches!(gcd(0, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).unwrap().factors().is_empty());
        assert_eq!(factorize(12).unwrap().factors(), &[(2, 2), (3, 1)]);
        assert!(factorize(0).is_err());
    }

    #[test]
    fn factorize_2_pow_53_minus_1() {
        let n = 9_007_199_254_740_991u64;
        let f = factorize(n).unwrap();
        assert_eq!(f.factors(), &[(6361, 1), (69431, 1), (20394401, 1)]);
        let back: u64 = f.factors().iter().map(|&(p, k)| p.pow(k)).product();
        assert_eq!(back, n);
        assert!(f.factors().iter().all(|&(p, _)| is_prime(p)));
    }

    #[test]
    fn factorize_large_semiprime_uses_rho() {
        // both factors exceed the trial-division table
        let (p, q) = (1_000_000_007u64, 998_244_353u64);
        let f = factorize(p * q).unwrap();
        assert_eq!(f.factors(), &[(q, 1), (p, 1)]);
        let f = factorize(p * p).unwrap();
        assert_eq!(f.factors(), &[(p, 2)]);
    }

    #[test]
    fn spf_examples() {
        let t = SpfTable::build(10).unwrap();
        assert_eq!((t.spf(4), t.spf(9), t.spf(7)), (2, 3, 7));
        let t = SpfTable::build(100).unwrap();
        assert_eq!(t.spf(91), 7);
        assert!(SpfTable::build(1).is_err());
        assert!(matches!(
            SpfTable::build(MAX_SIEVE_LIMIT + 1),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn spf_prime_count_matches_eratosthenes() {
        let t = SpfTable::build(1_000_000).unwrap();
        let count = (2..=1_000_000u64).filter(|&i| t.spf(i) == i).count();
        assert_eq!(count, eratosthenes(1_000_000).len());
        assert_eq!(count, 78498);
    }

    #[test]
    fn spf_table_invariants() {
        let t = SpfTable::build(20_000).unwrap();
        for i in 2..=20_000u64 {
            let s = t.spf(i);
            assert_eq!(i % s, 0);
            assert!(s * s <= i || s == i);
            assert_eq!(s == i, is_prime(i));
        }
    }

    #[test]
    fn spf_factorization_agrees_with_trial_division() {
        let t = SpfTable::build(1_000_000).unwrap();
        for n in 1..=1_000_000u64 {
            assert_eq!(t.factorize(n).unwrap(), factorize(n).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn factorization_products() {
        for n in 1..=100_000u64 {
            let f = factorize(n).unwrap();
            let back: u64 = f.factors().iter().map(|&(p, k)| p.pow(k)).product();
            assert_eq!(back, n);
            assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
            assert_eq!(n == 1, f.factors().is_empty());
        }
    }

    #[test]
    fn primes_in_range_examples() {
        assert_eq!(primes_in_range(10, 20).unwrap(), vec![11, 13, 17, 19]);
        assert_eq!(primes_in_range(1, 10).unwrap(), vec![2, 3, 5, 7]);
        assert!(primes_in_range(20, 10).is_err());
    }

    #[test]
    fn primes_in_range_counts_against_sieve() {
        let x = 100_000f64;
        let lo = (x / x.ln()).floor() as u64;
        let got = primes_in_range(lo, 100_000).unwrap();
        let t = SpfTable::build(100_000).unwrap();
        let by_sieve = (lo + 1..=100_000).filter(|&i| t.is_prime(i)).count();
        assert_eq!(got.len(), by_sieve);
        // pi(10^5) - pi(8685) = 9592 - 1081
        assert_eq!(got.len(), 8511);
    }

    #[test]
    fn primes_in_range_above_table() {
        let got = primes_in_range(1_000_000, 1_000_100).unwrap();
        let expect: Vec<u64> = (1_000_001..=1_000_100).filter(|&i| is_prime(i)).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn divisors_are_sorted_and_complete() {
        let f = factorize(360).unwrap();
        let expect: Vec<u64> = (1..=360).filter(|d| 360 % d == 0).collect();
        assert_eq!(f.divisors(), expect);
    }

    proptest! {
        #[test]
        fn gcd_divides_and_commutes(a in 0u64..(1 << 62), b in 1u64..(1 << 62), c in 1u64..(1 << 62)) {
            let g = gcd(a, b).unwrap();
            prop_assert_eq!(g, gcd(b, a).unwrap());
            prop_assert_eq!(a % g, 0);
            prop_assert_eq!(b % g, 0);
            let left = gcd(gcd(a, b).unwrap(), c).unwrap();
            let right = gcd(a, gcd(b, c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn rational_add_sub_roundtrip(a in -10_000i64..10_000, b in 1i64..10_000, c in -10_000i64..10_000, d in 1i64..10_000) {
            let x = rational(a, b);
            let y = rational(c, d);
            prop_assert_eq!(&(&x + &y) - &y, x);
        }

        #[test]
        fn factorize_random_u64(n in 1u64..u64::MAX) {
            let f = factorize(n).unwrap();
            let back = f.factors().iter().fold(1u128, |acc, &(p, k)| acc * (p as u128).pow(k));
            prop_assert_eq!(back, n as u128);
            prop_assert!(f.factors().iter().all(|&(p, _)| is_prime(p)));
        }
    }
}
