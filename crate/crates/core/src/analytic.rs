//! Summatory scans of `A_r` and `tau_k`, main-term fitting, residual
//! exponents and the extremal-order statistic.
//!
//! Scans walk `1..=x_max` once over a smallest-prime-factor table and
//! evaluate the selected function multiplicatively in `f64`. Work is cut
//! into fixed chunks (independent of the thread count) whose compensated
//! sums are reduced in chunk order, so output is identical for any number
//! of threads.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{primes_in_range, SpfTable, MAX_SIEVE_LIMIT};
use crate::dirichlet::{f_r_local, LocalPolynomial};
use crate::error::{Error, Result};

/// Integers per work chunk during a scan.
const CHUNK: u64 = 1 << 16;

/// Largest condition number accepted by [`fit_main_term`].
pub const MAX_CONDITION: f64 = 1e10;

pub const DEFAULT_CHECKPOINTS: usize = 40;

/// Neumaier's compensated summation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Which summatory function a scan computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "function", content = "param", rename_all = "snake_case")]
pub enum Selector {
    /// `A_r` with the given `r >= 1`.
    GcdSum(u32),
    /// Piltz `tau_k` with the given `k >= 2`.
    Piltz(u32),
}

impl Selector {
    fn validate(self) -> Result<()> {
        match self {
            Selector::GcdSum(0) => Err(Error::domain("A_r scans need r >= 1")),
            Selector::Piltz(k) if k < 2 => Err(Error::domain("tau_k scans need k >= 2")),
            _ => Ok(()),
        }
    }

    /// Degree of the main-term polynomial in `log x`.
    pub fn main_term_degree(self) -> usize {
        match self {
            Selector::GcdSum(r) => r as usize,
            Selector::Piltz(k) => k as usize - 1,
        }
    }

    /// Floating-point value at `p^k`.
    #[inline]
    fn local(self, p: u64, k: u32) -> f64 {
        match self {
            Selector::GcdSum(r) => {
                // sum_j C(k+j-1, j) q^j with the ratio of consecutive terms
                let q = 1.0 - 1.0 / p as f64;
                let mut term = 1.0;
                let mut acc = 1.0;
                for j in 1..=r {
                    term *= q * (k + j - 1) as f64 / j as f64;
                    acc += term;
                }
                acc
            }
            Selector::Piltz(m) => {
                // C(k + m - 1, m - 1)
                let mut c = 1.0;
                for i in 1..m {
                    c = c * (k + i) as f64 / i as f64;
                }
                c
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub x: u64,
    pub sum: f64,
}

/// Estimate of the leading coefficient with a bound on the truncation error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingCoefficient {
    pub value: f64,
    pub tail_bound: f64,
}

/// Main-term polynomial `Q(t)`, coefficients ascending in `t = log x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MainTermFit {
    pub degree: usize,
    pub coefficients: Vec<f64>,
    /// Leading coefficient held fixed during the fit, if any.
    pub fixed_leading: Option<f64>,
}

impl MainTermFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// `x Q(log x)`.
    pub fn main_term(&self, x: f64) -> f64 {
        x * self.eval(x.ln())
    }

    pub fn leading(&self) -> f64 {
        self.coefficients[self.degree]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub x: u64,
    pub residual: f64,
}

/// Output of [`summatory_scan`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummatoryReport {
    pub selector: Selector,
    pub x_max: u64,
    pub checkpoints: Vec<Checkpoint>,
    /// Fit with the leading coefficient pinned to `euler_leading`.
    pub fitted_poly: Option<MainTermFit>,
    /// Fit with every coefficient free.
    pub free_fit: Option<MainTermFit>,
    pub euler_leading: LeadingCoefficient,
    pub residuals: Vec<Residual>,
    pub residual_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub elapsed_secs: Option<f64>,
}

impl SummatoryReport {
    /// Rows `x,sum,main_term,residual`. Fields without a fit are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,sum,main_term,residual\n");
        for cp in &self.checkpoints {
            match &self.fitted_poly {
                Some(fit) => {
                    let main = fit.main_term(cp.x as f64);
                    out.push_str(&format!("{},{},{},{}\n", cp.x, cp.sum, main, cp.sum - main));
                }
                None => out.push_str(&format!("{},{},,\n", cp.x, cp.sum)),
            }
        }
        out
    }
}

/// One parsed row of [`SummatoryReport::to_csv`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CsvRow {
    pub x: u64,
    pub sum: f64,
    pub main_term: Option<f64>,
    pub residual: Option<f64>,
}

pub fn parse_scan_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    if lines.next() != Some("x,sum,main_term,residual") {
        return Err(Error::domain("missing scan CSV header"));
    }
    let bad = |line: &str| Error::domain(format!("malformed scan CSV row {line:?}"));
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(bad(line));
            }
            let opt = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad(line))
                }
            };
            Ok(CsvRow {
                x: fields[0].parse().map_err(|_| bad(line))?,
                sum: fields[1].parse().map_err(|_| bad(line))?,
                main_term: opt(fields[2])?,
                residual: opt(fields[3])?,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    pub checkpoint_count: usize,
    /// Smallest checkpoint; the largest is always `x_max`.
    pub x_min: u64,
    /// Worker threads; 1 runs on the calling thread.
    pub threads: usize,
    pub prime_limit: u64,
    pub tail_terms: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            checkpoint_count: DEFAULT_CHECKPOINTS,
            x_min: 100,
            threads: 1,
            prime_limit: 1_000_000,
            tail_terms: 10_000,
        }
    }
}

/// Geometrically spaced integers from `lo` to `hi`, deduplicated, ending at `hi`.
pub fn geometric_checkpoints(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    let lo = lo.clamp(1, hi);
    if count <= 1 || lo == hi {
        return vec![hi];
    }
    let ratio = (hi as f64 / lo as f64).ln() / (count - 1) as f64;
    let mut xs: Vec<u64> = (0..count)
        .map(|i| ((lo as f64) * (ratio * i as f64).exp()).round() as u64)
        .map(|x| x.clamp(lo, hi))
        .collect();
    xs.push(hi);
    xs.sort_unstable();
    xs.dedup();
    xs
}

fn chunk_sum(table: &SpfTable, selector: Selector, lo: u64, hi: u64) -> CompensatedSum {
    let mut acc = CompensatedSum::default();
    for n in lo..=hi {
        let mut v = 1.0;
        table.for_each_prime_power(n, |p, k| v *= selector.local(p, k));
        acc.add(v);
    }
    acc
}

/// Partial sums at geometric checkpoints, then main-term fit and residuals.
pub fn summatory_scan(selector: Selector, x_max: u64, checkpoint_count: usize) -> Result<SummatoryReport> {
    summatory_scan_with(
        selector,
        x_max,
        &ScanOptions {
            checkpoint_count,
            ..ScanOptions::default()
        },
    )
}

pub fn summatory_scan_with(selector: Selector, x_max: u64, opts: &ScanOptions) -> Result<SummatoryReport> {
    selector.validate()?;
    if x_max < 10 {
        return Err(Error::domain(format!("x_max must be >= 10, got {x_max}")));
    }
    if x_max > MAX_SIEVE_LIMIT {
        return Err(Error::resource("scan sieve entries", x_max as u128, MAX_SIEVE_LIMIT as u128));
    }
    if opts.checkpoint_count == 0 {
        return Err(Error::domain("checkpoint_count must be positive"));
    }
    let start = Instant::now();
    let table = SpfTable::build(x_max)?;
    let xs = geometric_checkpoints(opts.x_min.min(x_max), x_max, opts.checkpoint_count);

    // Chunk boundaries: every checkpoint, plus every CHUNK integers.
    let mut chunks: Vec<(u64, u64, bool)> = Vec::new();
    let mut lo = 1;
    for &x in &xs {
        while lo <= x {
            let hi = (lo + CHUNK - 1).min(x);
            chunks.push((lo, hi, hi == x));
            lo = hi + 1;
        }
    }

    let partials: Vec<CompensatedSum> = if opts.threads <= 1 {
        chunks.iter().map(|&(a, b, _)| chunk_sum(&table, selector, a, b)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| Error::numerical(format!("thread pool: {e}")))?;
        pool.install(|| {
            chunks
                .par_iter()
                .map(|&(a, b, _)| chunk_sum(&table, selector, a, b))
                .collect()
        })
    };

    let mut running = CompensatedSum::default();
    let mut checkpoints = Vec::with_capacity(xs.len());
    for (&(_, hi, is_checkpoint), part) in chunks.iter().zip(&partials) {
        running.merge(part);
        if is_checkpoint {
            checkpoints.push(Checkpoint {
                x: hi,
                sum: running.value(),
            });
        }
    }

    let euler_leading = match selector {
        Selector::GcdSum(r) => euler_leading_coefficient(r, opts.prime_limit, opts.tail_terms)?,
        Selector::Piltz(k) => LeadingCoefficient {
            value: 1.0 / factorial(k - 1),
            tail_bound: 0.0,
        },
    };

    let degree = selector.main_term_degree();
    let fitted_poly = fit_main_term(&checkpoints, degree, Some(euler_leading.value)).ok();
    let free_fit = fit_main_term(&checkpoints, degree, None).ok();
    let residuals: Vec<Residual> = match &fitted_poly {
        Some(fit) => checkpoints
            .iter()
            .map(|cp| Residual {
                x: cp.x,
                residual: cp.sum - fit.main_term(cp.x as f64),
            })
            .collect(),
        None => Vec::new(),
    };
    let residual_exponent = exponent_from_residuals(&residuals).ok();

    Ok(SummatoryReport {
        selector,
        x_max,
        checkpoints,
        fitted_poly,
        free_fit,
        euler_leading,
        residuals,
        residual_exponent,
        elapsed_secs: Some(start.elapsed().as_secs_f64()),
    })
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Truncated Euler product `(1/r!) prod_{p <= prime_limit} (1 + sum_{k=1}^r f_r(p^k)/p^k)`.
///
/// The tail bound majorizes the omitted primes by all integers `n > P`:
/// each omitted factor is `1 + O(C/p^2)`, and `sum_{n > P} n^{-2}` is taken
/// as `tail_terms` explicit terms plus the integral remainder.
pub fn euler_leading_coefficient(r: u32, prime_limit: u64, tail_terms: u64) -> Result<LeadingCoefficient> {
    if r == 0 {
        return Err(Error::domain("leading coefficient needs r >= 1"));
    }
    if prime_limit < 100 {
        return Err(Error::domain(format!("prime_limit must be >= 100, got {prime_limit}")));
    }
    let polys: Vec<LocalPolynomial> = (1..=r).map(|k| f_r_local(r, k)).collect::<Result<_>>()?;
    let primes = primes_in_range(1, prime_limit)?;
    let mut log_sum = CompensatedSum::default();
    for &p in &primes {
        let pf = p as f64;
        let mut pk = 1.0;
        let mut s = 0.0;
        for poly in &polys {
            pk *= pf;
            s += poly.eval_f64(pf) / pk;
        }
        log_sum.add(s.ln_1p());
    }
    let value = log_sum.value().exp() / factorial(r);

    // |sum_k f_r(p^k)/p^k| <= C / p^2 for p > P
    let big_p = prime_limit as f64;
    let c: f64 = polys
        .iter()
        .enumerate()
        .map(|(idx, poly)| {
            let k = idx as i32 + 1;
            poly.coefficients()
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, ci)| {
                    use num_traits::{Signed, ToPrimitive};
                    ci.abs().to_f64().unwrap_or(f64::INFINITY) * big_p.powi(-(i as i32 + k - 2))
                })
                .sum::<f64>()
        })
        .sum();
    let mut tail = CompensatedSum::default();
    for n in prime_limit + 1..=prime_limit + tail_terms {
        tail.add(1.0 / (n as f64 * n as f64));
    }
    tail.add(1.0 / (prime_limit + tail_terms) as f64);
    let x = c / (big_p * big_p);
    let log_bound = c * tail.value() / (1.0 - x);
    let rounding = 4.0 * f64::EPSILON * primes.len() as f64 * value;
    Ok(LeadingCoefficient {
        value,
        tail_bound: value * log_bound.exp_m1() + rounding,
    })
}

/// Least-squares fit of `S(x)/x ~ Q(log x)` with `deg Q = degree`.
///
/// Rows are weighted by `sqrt(x)`, i.e. the objective is
/// `sum (S(x) - x Q(log x))^2 / x`; unweighted rows let the noisy
/// small-`x` checkpoints bias the lower coefficients.
///
/// With `fixed_leading` the top coefficient is pinned and only the lower
/// ones are fitted. Returns all `degree + 1` coefficients, ascending.
pub fn fit_main_term(checkpoints: &[Checkpoint], degree: usize, fixed_leading: Option<f64>) -> Result<MainTermFit> {
    if checkpoints.len() < degree + 2 {
        return Err(Error::numerical(format!(
            "{} checkpoints cannot fit degree {degree}; need at least {}",
            checkpoints.len(),
            degree + 2
        )));
    }
    let x_lo = checkpoints.iter().map(|c| c.x).min().unwrap_or(0) as f64;
    let x_hi = checkpoints.iter().map(|c| c.x).max().unwrap_or(0) as f64;
    if x_lo <= 0.0 || x_hi / x_lo < 100.0 {
        return Err(Error::numerical(format!(
            "checkpoints span [{x_lo}, {x_hi}], need at least two decades"
        )));
    }
    let free = if fixed_leading.is_some() { degree } else { degree + 1 };
    if free == 0 {
        return Ok(MainTermFit {
            degree,
            coefficients: vec![fixed_leading.unwrap_or_default()],
            fixed_leading,
        });
    }
    let rows = checkpoints.len();
    let mut design = DMatrix::<f64>::zeros(rows, free);
    let mut target = DVector::<f64>::zeros(rows);
    for (i, cp) in checkpoints.iter().enumerate() {
        let x = cp.x as f64;
        let t = x.ln();
        let w = x.sqrt();
        for j in 0..free {
            design[(i, j)] = w * t.powi(j as i32);
        }
        target[i] = w * (cp.sum / x - fixed_leading.map_or(0.0, |c| c * t.powi(degree as i32)));
    }
    let svd = design.svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::numerical(format!(
            "design matrix condition {condition:.3e} exceeds {MAX_CONDITION:.0e}; use more or wider-spread checkpoints"
        )));
    }
    let solution = svd
        .solve(&target, 0.0)
        .map_err(|e| Error::numerical(format!("least squares failed: {e}")))?;
    let mut coefficients: Vec<f64> = solution.iter().copied().collect();
    if let Some(c) = fixed_leading {
        coefficients.push(c);
    }
    Ok(MainTermFit {
        degree,
        coefficients,
        fixed_leading,
    })
}

/// Least-squares slope of `log|R(x)|` against `log x`, skipping `|R| < 1`.
pub fn exponent_from_residuals(residuals: &[Residual]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = residuals
        .iter()
        .filter(|r| r.residual.abs() >= 1.0 && r.x > 0)
        .map(|r| ((r.x as f64).ln(), r.residual.abs().ln()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::numerical(format!(
            "only {} residuals with |R| >= 1; need 10",
            pts.len()
        )));
    }
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 2.0 * std::f64::consts::LN_10 {
        return Err(Error::numerical("usable residuals span less than two decades"));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

pub fn residual_exponent_estimate(report: &SummatoryReport) -> Result<f64> {
    exponent_from_residuals(&report.residuals)
}

/// The three exponents of the reference curve `b_r(x)`: on `x log x`,
/// on `log log x`, and on `log log log x`.
pub fn omega_exponents(r: u32) -> (f64, f64, f64) {
    let r = r as f64;
    let a = r / (2.0 * r + 2.0);
    let b = (r + 2.0) / (2.0 * r + 2.0) * ((r + 1.0).powf((2.0 * r + 2.0) / (r + 2.0)) - 1.0);
    let c = -(3.0 * r + 2.0) / (4.0 * r + 4.0);
    (a, b, c)
}

/// Reference curve for the size of the oscillating error term.
pub fn omega_bound(r: u32, x: f64) -> Result<f64> {
    if r == 0 {
        return Err(Error::domain("omega bound needs r >= 1"));
    }
    if !(x >= 20.0) {
        return Err(Error::domain(format!("omega bound needs x >= 20, got {x}")));
    }
    let (a, b, c) = omega_exponents(r);
    let l1 = x.ln();
    let l2 = l1.ln();
    let l3 = l2.ln();
    Ok((x * l1).powf(a) * l2.powf(b) * l3.powf(c))
}

/// `log A_r(n_x) log log n_x / log n_x` for `n_x` the product of primes in
/// `(x / log x, x]`, computed in the log domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalSample {
    pub r: u32,
    pub x: u64,
    pub log_n_x: f64,
    pub omega_n_x: u64,
    pub log_a_r: f64,
    pub statistic: f64,
}

pub fn extremal_statistic(r: u32, x: u64) -> Result<ExtremalSample> {
    if r == 0 {
        return Err(Error::domain("extremal statistic needs r >= 1"));
    }
    if x < 100 {
        return Err(Error::domain(format!("extremal statistic needs x >= 100, got {x}")));
    }
    let xf = x as f64;
    let lo = (xf / xf.ln()).floor() as u64;
    let primes = primes_in_range(lo, x)?;
    let mut log_n = CompensatedSum::default();
    let mut log_a = CompensatedSum::default();
    for &p in &primes {
        let pf = p as f64;
        log_n.add(pf.ln());
        let q = 1.0 - 1.0 / pf;
        let mut term = 1.0;
        let mut local = 1.0;
        for _ in 0..r {
            term *= q;
            local += term;
        }
        log_a.add(local.ln());
    }
    let log_n_x = log_n.value();
    let log_a_r = log_a.value();
    Ok(ExtremalSample {
        r,
        x,
        log_n_x,
        omega_n_x: primes.len() as u64,
        log_a_r,
        statistic: log_a_r * log_n_x.ln() / log_n_x,
    })
}
