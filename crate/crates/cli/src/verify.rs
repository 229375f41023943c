use gcdsum::arith::{factorize, gcd};
use gcdsum::dirichlet::{convolve_eval, f_r, verify_fr_structure, DirichletPair};
use gcdsum::gcdsum::{
    a_bruteforce, a_eval, a_recursion, b_bruteforce, b_closed, coprime_progression_count, menon_sum,
};
use gcdsum::multfun::{standard, StandardFunction};
use gcdsum::{Error, ExactRational, Result};
use num_bigint::BigInt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::cli::{Suite, VerifyArgs};

/// Pass count over the items of one suite and the first failing item.
pub struct SuiteReport {
    pub suite: &'static str,
    pub passed: u64,
    pub total: u64,
    pub counterexample: Option<String>,
}

impl SuiteReport {
    fn new(suite: &'static str) -> Self {
        SuiteReport {
            suite,
            passed: 0,
            total: 0,
            counterexample: None,
        }
    }

    fn record(&mut self, failure: Option<String>) {
        self.total += 1;
        match failure {
            None => self.passed += 1,
            Some(msg) => {
                if self.counterexample.is_none() {
                    self.counterexample = Some(msg);
                }
            }
        }
    }

    pub fn ok(&self) -> bool {
        self.passed == self.total
    }

    pub fn text(&self) -> String {
        match &self.counterexample {
            None => format!("PASS {}/{}\n", self.passed, self.total),
            Some(c) => format!("FAIL {}/{}\nsmallest counterexample: {c}\n", self.passed, self.total),
        }
    }

    pub fn json(&self) -> serde_json::Value {
        json!({
            "suite": self.suite,
            "passed": self.passed,
            "total": self.total,
            "counterexample": self.counterexample,
        })
    }

    pub fn csv(&self) -> String {
        format!(
            "suite,passed,total,counterexample\n{},{},{},{}\n",
            self.suite,
            self.passed,
            self.total,
            self.counterexample.as_deref().unwrap_or("").replace(',', ";")
        )
    }
}

fn int(v: u128) -> ExactRational {
    ExactRational::from_integer(BigInt::from(v))
}

fn phi_tau(n: u64) -> Result<ExactRational> {
    Ok(standard("phi")?.eval_u64(n)? * standard("tau")?.eval_u64(n)?)
}

/// Items are visited in increasing order of `n` (then `r`), so the first
/// failure recorded is the smallest counterexample.
pub fn run(args: &VerifyArgs) -> Result<SuiteReport> {
    let nmax = |default: u64| args.nmax.unwrap_or(default);
    let rmax = |default: u32| args.rmax.unwrap_or(default);
    match args.suite {
        Suite::AThreeway => {
            let mut rep = SuiteReport::new("a-threeway");
            let rmax = rmax(2);
            for n in 1..=nmax(100) {
                let mut fail = None;
                for r in 0..=rmax {
                    let (b, l, c) = (a_bruteforce(n, r)?, a_eval(n, r)?, a_recursion(n, r)?);
                    if b != l || l != c {
                        fail = Some(format!("n={n}, r={r}: bruteforce={b}, local={l}, recursion={c}"));
                        break;
                    }
                }
                rep.record(fail);
            }
            Ok(rep)
        }
        Suite::Menon => {
            let mut rep = SuiteReport::new("menon");
            for n in 1..=nmax(100) {
                let target = phi_tau(n)?;
                let mut fail = None;
                for a in (1..=n).filter(|&a| gcd(a, n) == Ok(1)) {
                    let m = menon_sum(n, a as i64)?;
                    if int(m) != target {
                        fail = Some(format!("n={n}, a={a}: menon_sum={m}, phi*tau={target}"));
                        break;
                    }
                }
                rep.record(fail);
            }
            Ok(rep)
        }
        Suite::BClosed => {
            let mut rep = SuiteReport::new("b-closed");
            let rmax = rmax(3);
            for n in 1..=nmax(100) {
                let mut fail = None;
                for r in 1..=rmax {
                    let (b, c) = (b_bruteforce(n, r)?, b_closed(n, r)?);
                    if b != c {
                        fail = Some(format!("n={n}, r={r}: bruteforce={b}, closed={c}"));
                        break;
                    }
                }
                rep.record(fail);
            }
            Ok(rep)
        }
        Suite::Progression => {
            let mut rep = SuiteReport::new("progression");
            let phi = standard("phi")?;
            for n in 1..=nmax(100) {
                let fac = factorize(n)?;
                let phi_n = phi.eval(&fac);
                let mut fail = None;
                'outer: for d in fac.divisors() {
                    let expected = &phi_n / phi.eval_u64(d)?;
                    for x in (1..=d).filter(|&x| gcd(x, d) == Ok(1)) {
                        let c = coprime_progression_count(n, d, x)?;
                        if int(c as u128) != expected {
                            fail = Some(format!("n={n}, d={d}, x={x}: count={c}, expected={expected}"));
                            break 'outer;
                        }
                    }
                }
                rep.record(fail);
            }
            Ok(rep)
        }
        Suite::FrVanishing => {
            let mut rep = SuiteReport::new("fr-vanishing");
            let rmax = rmax(6);
            let kmax = args.kmax.unwrap_or(rmax + 6);
            for r in 1..=rmax {
                match verify_fr_structure(r, kmax) {
                    Ok(_) => rep.record(None),
                    Err(Error::Verification(msg)) => rep.record(Some(msg)),
                    Err(e) => return Err(e),
                }
            }
            Ok(rep)
        }
        Suite::FrConvolution => {
            let mut rep = SuiteReport::new("fr-convolution");
            let rmax = rmax(3);
            let pairs = (1..=rmax)
                .map(|r| Ok((r, StandardFunction::TauK(r + 1).build(), f_r(r)?)))
                .collect::<Result<Vec<_>>>()?;
            for n in 1..=nmax(1000) {
                let fac = factorize(n)?;
                let mut fail = None;
                for (r, tau, f) in &pairs {
                    let conv = convolve_eval(tau, f, &fac);
                    let a = a_eval(n, *r)?;
                    if conv != a {
                        fail = Some(format!("n={n}, r={r}: (tau_{} * f_{r})(n)={conv}, A_r(n)={a}", r + 1));
                        break;
                    }
                }
                rep.record(fail);
            }
            Ok(rep)
        }
        Suite::Inverse => {
            let mut rep = SuiteReport::new("inverse");
            let depth = args.kmax.unwrap_or(8);
            for r in 1..=rmax(4) {
                match DirichletPair::inverse_of(f_r(r)?).verify(depth, &[2, 3, 5, 7, 11, 13]) {
                    Ok(()) => rep.record(None),
                    Err(Error::Verification(msg)) => rep.record(Some(format!("r={r}: {msg}"))),
                    Err(e) => return Err(e),
                }
            }
            Ok(rep)
        }
        Suite::Domination => {
            let mut rep = SuiteReport::new("domination");
            let rmax = rmax(4);
            let taus: Vec<_> = (0..=rmax).map(|r| StandardFunction::TauK(r + 1).build()).collect();
            for n in 1..=nmax(1000) {
                let fac = factorize(n)?;
                let mut fail = None;
                for r in 0..=rmax {
                    let a = a_eval(n, r)?;
                    let t = taus[r as usize].eval(&fac);
                    let strict_ok = if n == 1 { a == t } else { a < t || r == 0 };
                    if a > t || !strict_ok {
                        fail = Some(format!("n={n}, r={r}: A_r(n)={a}, tau_{}(n)={t}", r + 1));
                        break;
                    }
                }
                rep.record(fail);
            }
            Ok(rep)
        }
        Suite::Limit => {
            let mut rep = SuiteReport::new("limit");
            let rmax = rmax(200);
            for n in 1..=nmax(30) {
                let fac = factorize(n)?;
                let mut fail = None;
                let mut prev = gcdsum::gcdsum::a_eval_factored(&fac, 0);
                for r in 1..=rmax {
                    let cur = gcdsum::gcdsum::a_eval_factored(&fac, r);
                    if cur < prev {
                        fail = Some(format!("n={n}, r={r}: A_r(n)={cur} < A_(r-1)(n)={prev}"));
                        break;
                    }
                    prev = cur;
                }
                if fail.is_none() {
                    let gap = (int(n as u128) - &prev) / int(n as u128);
                    if gap.clone() * int(1000) >= int(1) {
                        fail = Some(format!("n={n}, r={rmax}: relative gap to n is {gap}, not below 1/1000"));
                    }
                }
                rep.record(fail);
            }
            Ok(rep)
        }
        Suite::Multiplicative => {
            let mut rep = SuiteReport::new("multiplicative");
            let bound = nmax(1000).max(2);
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let mut pairs = Vec::with_capacity(args.samples);
            while pairs.len() < args.samples {
                let (m, n) = (rng.gen_range(1..=bound), rng.gen_range(1..=bound));
                if gcd(m, n)? == 1 {
                    pairs.push((m, n));
                }
            }
            pairs.sort_by_key(|&(m, n)| (m * n, m));
            let names = [
                "one", "phi", "phi_bar", "jordan(2)", "tau", "tau_k(3)", "mu", "mu_iter(3)", "psi(1)", "psi(2)",
            ];
            let funcs = names.iter().map(|s| standard(s)).collect::<Result<Vec<_>>>()?;
            for (m, n) in pairs {
                let mut fail = None;
                for f in &funcs {
                    let (fm, fn_, fmn) = (f.eval_u64(m)?, f.eval_u64(n)?, f.eval_u64(m * n)?);
                    if &fm * &fn_ != fmn {
                        fail = Some(format!("{}: f({m})={fm}, f({n})={fn_}, f({})={fmn}", f.name(), m * n));
                        break;
                    }
                }
                rep.record(fail);
            }
            Ok(rep)
        }
    }
}
