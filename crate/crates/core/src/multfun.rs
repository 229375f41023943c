//! Multiplicative arithmetic functions defined by their prime-power values.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{factorize, rational_int, ExactRational, FactoredInteger};
use crate::error::{Error, Result};

type LocalFn = dyn Fn(u64, u32) -> ExactRational + Send + Sync;

/// A multiplicative function, stored as its evaluator at prime powers `p^k`
/// with `k >= 1`. The value at 1 is always 1.
#[derive(Clone)]
pub struct MultiplicativeFunction {
    name: String,
    local: Arc<LocalFn>,
}

impl fmt::Debug for MultiplicativeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplicativeFunction")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl MultiplicativeFunction {
    pub fn new(
        name: impl Into<String>,
        local: impl Fn(u64, u32) -> ExactRational + Send + Sync + 'static,
    ) -> Self {
        MultiplicativeFunction {
            name: name.into(),
            local: Arc::new(local),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Value at `p^k`; `k = 0` gives 1.
    pub fn local(&self, p: u64, k: u32) -> ExactRational {
        if k == 0 {
            ExactRational::one()
        } else {
            (self.local)(p, k)
        }
    }

    pub fn eval(&self, n: &FactoredInteger) -> ExactRational {
        n.factors()
            .iter()
            .fold(ExactRational::one(), |acc, &(p, k)| acc * self.local(p, k))
    }

    /// Convenience wrapper that factors `n` first.
    pub fn eval_u64(&self, n: u64) -> Result<ExactRational> {
        Ok(self.eval(&factorize(n)?))
    }

    /// Pointwise product `n -> f(n) g(n)`, again multiplicative.
    pub fn pointwise(&self, other: &MultiplicativeFunction) -> MultiplicativeFunction {
        let (f, g) = (self.clone(), other.clone());
        MultiplicativeFunction::new(format!("({})*({})", f.name, g.name), move |p, k| {
            f.local(p, k) * g.local(p, k)
        })
    }
}

/// Names accepted by [`standard`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StandardFunction {
    /// Constant function 1.
    One,
    /// Euler totient.
    Phi,
    /// `phi(n) / n`.
    PhiBar,
    /// Jordan totient of the given order.
    Jordan(u32),
    /// Number of divisors.
    Tau,
    /// Piltz divisor function: ordered factorizations into the given number of factors.
    TauK(u32),
    /// Moebius function.
    Mu,
    /// Dirichlet power of the Moebius function.
    MuIter(u32),
    /// `sum_{d | n} phi_m(d) / d^m`.
    Psi(u32),
}

impl StandardFunction {
    /// Parses `phi`, `phi_bar`, `one`, `jordan(k)`, `tau`, `tau_k(k)`, `mu`,
    /// `mu_iter(j)`, `psi(k)`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (head, arg) = match spec.find('(') {
            Some(open) if spec.ends_with(')') => {
                let inner = &spec[open + 1..spec.len() - 1];
                let v: u32 = inner
                    .trim()
                    .parse()
                    .map_err(|_| Error::domain(format!("bad parameter in {spec:?}")))?;
                (&spec[..open], Some(v))
            }
            _ => (spec, None),
        };
        let f = match (head, arg) {
            ("one", None) => StandardFunction::One,
            ("phi", None) => StandardFunction::Phi,
            ("phi_bar", None) => StandardFunction::PhiBar,
            ("tau", None) => StandardFunction::Tau,
            ("mu", None) => StandardFunction::Mu,
            ("jordan", Some(k)) => StandardFunction::Jordan(k),
            ("tau_k", Some(k)) => StandardFunction::TauK(k),
            ("mu_iter", Some(j)) => StandardFunction::MuIter(j),
            ("psi", Some(k)) => StandardFunction::Psi(k),
            _ => return Err(Error::domain(format!("unknown function {spec:?}"))),
        };
        match f {
            StandardFunction::Jordan(0)
            | StandardFunction::TauK(0)
            | StandardFunction::MuIter(0)
            | StandardFunction::Psi(0) => {
                Err(Error::domain(format!("parameter must be >= 1 in {spec:?}")))
            }
            f => Ok(f),
        }
    }

    pub fn build(self) -> MultiplicativeFunction {
        match self {
            StandardFunction::One => MultiplicativeFunction::new("one", |_, _| ExactRational::one()),
            StandardFunction::Phi => MultiplicativeFunction::new("phi", |p, k| {
                let pk1 = BigInt::from(p).pow(k - 1);
                rational_int(&pk1 * BigInt::from(p) - pk1)
            }),
            StandardFunction::PhiBar => MultiplicativeFunction::new("phi_bar", |p, _| {
                ExactRational::new(BigInt::from(p - 1), BigInt::from(p))
            }),
            StandardFunction::Jordan(m) => MultiplicativeFunction::new(format!("jordan({m})"), move |p, k| {
                let pm = BigInt::from(p).pow(m);
                let low = pm.pow(k - 1);
                rational_int(&low * pm - low)
            }),
            StandardFunction::Tau => {
                MultiplicativeFunction::new("tau", |_, k| rational_int(BigInt::from(k) + 1))
            }
            StandardFunction::TauK(m) => MultiplicativeFunction::new(format!("tau_k({m})"), move |_, k| {
                rational_int(binom_multiset(&BigInt::from(m), k))
            }),
            StandardFunction::Mu => MultiplicativeFunction::new("mu", |_, k| {
                if k == 1 {
                    -ExactRational::one()
                } else {
                    ExactRational::zero()
                }
            }),
            StandardFunction::MuIter(j) => MultiplicativeFunction::new(format!("mu_iter({j})"), move |_, k| {
                let c = binomial(&BigInt::from(j), k);
                rational_int(if k % 2 == 0 { c } else { -c })
            }),
            StandardFunction::Psi(m) => MultiplicativeFunction::new(format!("psi({m})"), move |p, k| {
                let pm = rational_int(BigInt::from(p).pow(m));
                let one = ExactRational::one();
                &one + rational_int(k) * (&one - one.clone() / pm)
            }),
        }
    }
}

/// Looks up a standard function by name; see [`StandardFunction::parse`].
pub fn standard(name: &str) -> Result<MultiplicativeFunction> {
    Ok(StandardFunction::parse(name)?.build())
}

/// Binomial coefficient `C(a, b)` for any integer `a`, via the falling
/// factorial. Gives `C(a, 0) = 1`, zero for `0 <= a < b`, and
/// `(-1)^b C(b - a - 1, b)` for negative `a`.
pub fn binomial(a: &BigInt, b: u32) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..b {
        num *= a - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Number of `k`-multisets drawn from an `n`-set, `C(n + k - 1, k)`.
pub fn binom_multiset(n: &BigInt, k: u32) -> BigInt {
    if k == 0 {
        return BigInt::one();
    }
    binomial(&(n + BigInt::from(k) - 1), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{gcd_unchecked, rational};
    use crate::dirichlet::convolve;
    use rand::{Rng, SeedableRng};

    fn r(n: i64) -> ExactRational {
        rational_int(n)
    }

    fn ordered_factorizations(n: u64, parts: u32) -> u64 {
        if parts == 1 {
            return 1;
        }
        (1..=n)
            .filter(|d| n % d == 0)
            .map(|d| ordered_factorizations(n / d, parts - 1))
            .sum()
    }

    #[test]
    fn eval_examples() {
        let phi = standard("phi").unwrap();
        assert_eq!(phi.eval_u64(12).unwrap(), r(4));
        assert_eq!(standard("tau").unwrap().eval_u64(1).unwrap(), r(1));
        assert_eq!(standard("jordan(2)").unwrap().eval_u64(12).unwrap(), r(96));
    }

    #[test]
    fn standard_examples() {
        assert_eq!(standard("tau_k(3)").unwrap().eval_u64(4).unwrap(), r(6));
        assert_eq!(standard("mu_iter(2)").unwrap().local(7, 1), r(-2));
        assert_eq!(standard("mu_iter(3)").unwrap().local(7, 4), r(0));
        assert!(matches!(standard("sigma"), Err(Error::Domain(_))));
        assert!(standard("tau_k(0)").is_err());
        assert!(standard("jordan(x)").is_err());
    }

    #[test]
    fn binom_multiset_examples() {
        assert_eq!(binom_multiset(&BigInt::from(1), 5), BigInt::from(1));
        assert_eq!(binom_multiset(&BigInt::from(3), 2), BigInt::from(6));
        // {aaa, aab, abb, bbb}
        assert_eq!(binom_multiset(&BigInt::from(2), 3), BigInt::from(4));
    }

    #[test]
    fn binom_multiset_is_signed_negative_binomial() {
        for n in -6i64..=6 {
            for k in 0..8u32 {
                let lhs = binom_multiset(&BigInt::from(n), k);
                let c = binomial(&BigInt::from(-n), k);
                let rhs = if k % 2 == 0 { c } else { -c };
                assert_eq!(lhs, rhs, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn tau_k_counts_ordered_factorizations() {
        for k in 2..=4u32 {
            let f = standard(&format!("tau_k({k})")).unwrap();
            for n in 1..=10_000u64 {
                // brute force is quadratic-ish in divisors; sample densely at small n
                if n > 2000 && n % 7 != 0 {
                    continue;
                }
                assert_eq!(f.eval_u64(n).unwrap(), r(ordered_factorizations(n, k) as i64));
            }
        }
    }

    #[test]
    fn psi1_over_n_is_gcd_mean() {
        // A_1(n) = (1/n) sum_k gcd(k, n), evaluated directly
        let psi = standard("psi(1)").unwrap();
        for n in 1..=10_000u64 {
            let direct: u64 = (1..=n).map(|k| gcd_unchecked(k, n)).sum();
            assert_eq!(psi.eval_u64(n).unwrap(), rational(direct as i64, n as i64));
        }
    }

    #[test]
    fn mu_iter_one_is_mu_and_matches_convolution_powers() {
        let mu = standard("mu").unwrap();
        let mu1 = standard("mu_iter(1)").unwrap();
        for p in [2u64, 3, 5, 7] {
            for k in 1..=10 {
                assert_eq!(mu.local(p, k), mu1.local(p, k));
            }
        }
        let mut power = mu.clone();
        for j in 2..=4u32 {
            power = convolve(&power, &mu);
            let local = standard(&format!("mu_iter({j})")).unwrap();
            for n in 1..=5000u64 {
                let f = factorize(n).unwrap();
                assert_eq!(local.eval(&f), power.eval(&f), "j={j} n={n}");
            }
        }
    }

    #[test]
    fn standard_functions_are_multiplicative() {
        let names = [
            "phi", "phi_bar", "jordan(2)", "jordan(3)", "tau", "tau_k(3)", "mu", "mu_iter(3)", "psi(1)", "psi(2)",
        ];
        let mut rng = seeded_rng();
        for name in names {
            let f = standard(name).unwrap();
            let mut checked = 0;
            while checked < 200 {
                let m = rng.gen_range(1..=10_000u64);
                let n = rng.gen_range(1..=10_000u64);
                if gcd_unchecked(m, n) != 1 {
                    continue;
                }
                let lhs = f.eval_u64(m * n).unwrap();
                let rhs = f.eval_u64(m).unwrap() * f.eval_u64(n).unwrap();
                assert_eq!(lhs, rhs, "{name} at {m}*{n}");
                checked += 1;
            }
        }
    }

    fn seeded_rng() -> rand::rngs::StdRng {
        rand::rngs::StdRng::seed_from_u64(0x5eed)
    }
}
