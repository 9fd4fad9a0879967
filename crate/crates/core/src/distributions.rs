//! Closed-form laws: `X_n`, `X_{Sel_p}`, their moments, Delaunay's
//! `X_{Sha[p],r}` and the formula evaluators built on them.
//!
//! Finite-level quantities are exact rationals. Limits involve infinite
//! products, which are truncated where the omitted factors are provably
//! within `2^-precision` of 1; the partial products themselves are kept
//! exact until the final conversion to `f64`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::check_prime;

pub const DEFAULT_PRECISION: u32 = 60;

/// A probability table over dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    pub support: Vec<u64>,
    pub probs_exact: Option<Vec<BigRational>>,
    pub probs_float: Vec<f64>,
    /// Upper bound on the probability mass outside `support`.
    pub tail_mass_bound: f64,
    /// Bits of precision the floating values were computed to.
    pub precision: u32,
}

impl Pmf {
    pub fn from_exact(support: Vec<u64>, probs: Vec<BigRational>) -> Self {
        let probs_float = probs.iter().map(to_f64).collect();
        Pmf {
            support,
            probs_exact: Some(probs),
            probs_float,
            tail_mass_bound: 0.0,
            precision: 53,
        }
    }

    pub fn prob(&self, d: u64) -> f64 {
        self.support
            .iter()
            .position(|&s| s == d)
            .map_or(0.0, |i| self.probs_float[i])
    }

    pub fn exact(&self, d: u64) -> Option<BigRational> {
        let probs = self.probs_exact.as_ref()?;
        Some(
            self.support
                .iter()
                .position(|&s| s == d)
                .map_or_else(BigRational::zero, |i| probs[i].clone()),
        )
    }

    pub fn total(&self) -> f64 {
        self.probs_float.iter().sum()
    }

    pub fn expect(&self, f: impl Fn(u64) -> f64) -> f64 {
        self.support
            .iter()
            .zip(&self.probs_float)
            .map(|(&d, &p)| f(d) * p)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|d| d as f64)
    }
}

/// Polynomial in `z` with exact rational coefficients, indexed by degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly {
    pub coefficients: Vec<BigRational>,
}

impl QPoly {
    pub fn eval(&self, z: &BigRational) -> BigRational {
        self.coefficients
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * z + c)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(d: u64) -> Parity {
        if d.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

pub(crate) fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn int(n: u64) -> BigInt {
    BigInt::from(n)
}

fn rat(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

fn pow(p: u64, e: u32) -> BigInt {
    num_traits::pow(int(p), e as usize)
}

/// `p^{-e}` as a rational.
fn inv_pow(p: u64, e: u32) -> BigRational {
    BigRational::new(BigInt::one(), pow(p, e))
}

/// A truncated infinite product: the true value lies in `[value * (1 - rel_err), value]`.
#[derive(Clone, Debug)]
pub(crate) struct Certified {
    pub value: BigRational,
    pub rel_err: BigRational,
}

impl Certified {
    fn scale(&self, k: &BigRational) -> Certified {
        Certified {
            value: &self.value * k,
            rel_err: self.rel_err.clone(),
        }
    }

    fn lower(&self) -> BigRational {
        &self.value * (BigRational::one() - &self.rel_err)
    }
}

#[derive(Clone, Copy)]
enum Factor {
    /// `1 - p^{-e}`
    OneMinus,
    /// `(1 + p^{-e})^{-1}`
    RecipOnePlus,
}

/// `prod_k factor(p^{-e_k})` over strictly increasing exponents `e_k`.
///
/// Stops at the first `e` with `p^{-e} <= 2^{-(precision+1)}`. The omitted
/// `x_k` sum to at most `2 p^{-e}` (ratio at most 1/2), and each omitted
/// product lies in `[1 - sum x_k, 1]`.
fn infinite_product(
    p: u64,
    exponents: impl Iterator<Item = u32>,
    factor: Factor,
    precision: u32,
) -> Certified {
    let cutoff = BigInt::one() << (precision as usize + 1);
    let mut value = BigRational::one();
    for e in exponents {
        let pe = pow(p, e);
        if pe >= cutoff {
            return Certified {
                value,
                rel_err: BigRational::new(int(2), pe),
            };
        }
        let x = BigRational::new(BigInt::one(), pe);
        value *= match factor {
            Factor::OneMinus => BigRational::one() - x,
            Factor::RecipOnePlus => (BigRational::one() + x).recip(),
        };
    }
    unreachable!("exponent sequences are unbounded")
}

/// `c = prod_{j>=0} (1 + p^{-j})^{-1}`.
pub(crate) fn limit_constant(p: u64, precision: u32) -> Certified {
    infinite_product(p, 0.., Factor::RecipOnePlus, precision)
}

/// `c = (1/2) prod_{i>=0} (1 - p^{-(2i+1)})`, the alternative expression for the same constant.
pub(crate) fn limit_constant_alternative(p: u64, precision: u32) -> Certified {
    let half = BigRational::new(int(1), int(2));
    infinite_product(p, (0..).map(|i| 2 * i + 1), Factor::OneMinus, precision).scale(&half)
}

/// `prod_{j>=0} (1 + p^{-j})^{-1}` to `precision` bits.
pub fn c_product(p: u64, precision: u32) -> Result<f64> {
    check_prime(p)?;
    Ok(to_f64(&limit_constant(p, precision).value))
}

/// `(1/2) prod_{i>=0} (1 - p^{-(2i+1)})` to `precision` bits.
pub fn c_alternative(p: u64, precision: u32) -> Result<f64> {
    check_prime(p)?;
    Ok(to_f64(&limit_constant_alternative(p, precision).value))
}

/// `P(X_n = d)` for `0 <= d <= n`, as exact rationals.
pub fn dist_a_dn(p: u64, n: u32) -> Result<Pmf> {
    check_prime(p)?;
    let base: BigRational = (0..n)
        .map(|j| (BigRational::one() + inv_pow(p, j)).recip())
        .product();
    let probs: Vec<BigRational> = (0..=n)
        .map(|d| {
            let ratio: BigRational = (1..=d)
                .map(|j| BigRational::new(int(p), pow(p, j) - 1))
                .product();
            // prod_{j<d} (1 - p^{j-n}), with j - n < 0 for every j < d <= n
            let falling: BigRational = (0..d)
                .map(|j| BigRational::one() - inv_pow(p, n - j))
                .product();
            &base * ratio * falling
        })
        .collect();
    Ok(Pmf::from_exact((0..=n as u64).collect(), probs))
}

/// Expansion of `prod_{i=0}^{n-1} (z + p^i) / (1 + p^i)`.
pub fn gen_poly(p: u64, n: u32) -> Result<QPoly> {
    check_prime(p)?;
    let mut coefficients = vec![BigRational::one()];
    for i in 0..n {
        let pi = rat(pow(p, i));
        let norm = (BigRational::one() + &pi).recip();
        let mut next = vec![BigRational::zero(); coefficients.len() + 1];
        for (k, c) in coefficients.iter().enumerate() {
            next[k] += c * &pi * &norm;
            next[k + 1] += c * &norm;
        }
        coefficients = next;
    }
    Ok(QPoly { coefficients })
}

/// `a_d` for `d <= dmax` with per-term certificates (recurrence `a_d = a_{d-1} p / (p^d - 1)`).
pub(crate) fn a_limit_certified(p: u64, dmax: u32, precision: u32) -> Vec<Certified> {
    let c = limit_constant(p, precision);
    let mut out = Vec::with_capacity(dmax as usize + 1);
    let mut current = c;
    out.push(current.clone());
    for d in 1..=dmax {
        current = current.scale(&BigRational::new(int(p), pow(p, d) - 1));
        out.push(current.clone());
    }
    out
}

fn certified_pmf(support: Vec<u64>, values: &[Certified], precision: u32) -> Pmf {
    let probs_float = values.iter().map(|c| to_f64(&c.value)).collect();
    let lower_sum: BigRational = values.iter().map(Certified::lower).sum();
    let tail = to_f64(&(BigRational::one() - lower_sum)).max(0.0).next_up();
    Pmf {
        support,
        probs_exact: None,
        probs_float,
        tail_mass_bound: tail,
        precision,
    }
}

/// `a_d = c prod_{j=1}^d p / (p^j - 1)` for `d <= dmax`.
pub fn dist_a_limit(p: u64, dmax: u32, precision: u32) -> Result<Pmf> {
    check_prime(p)?;
    let values = a_limit_certified(p, dmax, precision);
    Ok(certified_pmf(
        (0..=dmax as u64).collect(),
        &values,
        precision,
    ))
}

/// `P(s = d) = (prod_{j>=0} (1 + p^{-j})^{-1}) (prod_{j=1}^d p / (p^j - 1))`, each `d` evaluated directly.
pub fn intro_pmf_s(p: u64, dmax: u32, precision: u32) -> Result<Pmf> {
    check_prime(p)?;
    let values: Vec<Certified> = (0..=dmax)
        .map(|d| {
            let c = infinite_product(p, 0.., Factor::RecipOnePlus, precision);
            let mut factor = BigRational::one();
            for j in 1..=d {
                factor *= BigRational::new(int(p), pow(p, j) - 1);
            }
            c.scale(&factor)
        })
        .collect();
    Ok(certified_pmf(
        (0..=dmax as u64).collect(),
        &values,
        precision,
    ))
}

/// `E((p^{X_n})^m) = prod_{i=1}^m (p^i + 1) / (1 + p^{-(n-i)})`.
pub fn moment_finite(p: u64, n: u32, m: u32) -> Result<BigRational> {
    check_prime(p)?;
    Ok((1..=m)
        .map(|i| {
            let shift = if i <= n {
                inv_pow(p, n - i)
            } else {
                rat(pow(p, i - n))
            };
            rat(pow(p, i) + 1) / (BigRational::one() + shift)
        })
        .product())
}

/// `sum_d P(X_n = d) p^{md}`, the defining sum behind [`moment_finite`].
pub fn moment_by_summation(p: u64, n: u32, m: u32) -> Result<BigRational> {
    let pmf = dist_a_dn(p, n)?;
    let probs = pmf.probs_exact.expect("finite pmf is exact");
    Ok(probs
        .iter()
        .enumerate()
        .map(|(d, a)| a * rat(pow(p, m * d as u32)))
        .sum())
}

/// `E((p^{X_{Sel_p}})^m) = prod_{i=1}^m (p^i + 1)`.
pub fn moment_limit(p: u64, m: u32) -> Result<BigUint> {
    check_prime(p)?;
    Ok((1..=m).map(|i| BigUint::from(p).pow(i) + 1u32).product())
}

/// `P(X_n` has the given parity`)`, from `(G(1) ± G(-1)) / 2`.
pub fn parity_probability(p: u64, n: u32, parity: Parity) -> Result<BigRational> {
    let g = gen_poly(p, n)?;
    Ok(parity_part(&g, &BigRational::one(), parity))
}

fn parity_part(g: &QPoly, z: &BigRational, parity: Parity) -> BigRational {
    let (plus, minus) = (g.eval(z), g.eval(&-z.clone()));
    let two = rat(int(2));
    match parity {
        Parity::Even => (plus + minus) / two,
        Parity::Odd => (plus - minus) / two,
    }
}

/// `E(p^{m X_n} | X_n` has the given parity`)`.
pub fn conditional_moment(p: u64, n: u32, m: u32, parity: Parity) -> Result<BigRational> {
    let g = gen_poly(p, n)?;
    let prob = parity_part(&g, &BigRational::one(), parity);
    if prob.is_zero() {
        return Err(Error::ZeroProbability(format!(
            "X_{n} is never {}",
            if parity == Parity::Even {
                "even"
            } else {
                "odd"
            }
        )));
    }
    let z = rat(pow(p, m));
    Ok(parity_part(&g, &z, parity) / prob)
}

/// `E(p^{m X_{Sel_p}} | parity)` by summing the limit law over the parity class.
pub fn conditional_moment_limit(p: u64, m: u32, parity: Parity, precision: u32) -> Result<f64> {
    check_prime(p)?;
    // terms behave like p^{md - d(d-1)/2}; past this point they are below 2^-precision
    let dmax = 2 * m + 6 + (2.0 * precision as f64).sqrt().ceil() as u32;
    let values = a_limit_certified(p, dmax, precision);
    let (mut num, mut den) = (BigRational::zero(), BigRational::zero());
    for (d, a) in values.iter().enumerate() {
        if Parity::of(d as u64) == parity {
            num += &a.value * rat(pow(p, m * d as u32));
            den += &a.value;
        }
    }
    Ok(to_f64(&(num / den)))
}

/// `P(X_{Sha[p],r} = 2n)` for `n <= nmax`, certified.
pub(crate) fn sha_certified(p: u64, r: u32, nmax: u32, precision: u32) -> Vec<Certified> {
    (0..=nmax)
        .map(|n| {
            let tail = infinite_product(
                p,
                (n + 1..).map(|i| 2 * r + 2 * i - 1),
                Factor::OneMinus,
                precision,
            );
            let lead = inv_pow(p, n * (2 * r + 2 * n) - n);
            let denom: BigRational = (1..=n)
                .map(|i| BigRational::one() - inv_pow(p, 2 * i))
                .product();
            tail.scale(&(lead / denom))
        })
        .collect()
}

/// Delaunay's law of `dim Sha[p]` for rank `r`, supported on even integers `0, 2, .., 2 nmax`.
pub fn sha_pmf(p: u64, r: u32, nmax: u32, precision: u32) -> Result<Pmf> {
    check_prime(p)?;
    let values = sha_certified(p, r, nmax, precision);
    Ok(certified_pmf(
        (0..=nmax as u64).map(|n| 2 * n).collect(),
        &values,
        precision,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct MixtureRow {
    pub d: u32,
    pub a_d: f64,
    pub half_sha: f64,
    pub residual: f64,
}

/// Compares `a_d` with `(1/2) P(X_{Sha[p], d mod 2} = d - (d mod 2))` for `d <= dmax`.
pub fn mixture_table(p: u64, dmax: u32, precision: u32) -> Result<Vec<MixtureRow>> {
    check_prime(p)?;
    let a = a_limit_certified(p, dmax, precision);
    let half = BigRational::new(int(1), int(2));
    let sha: [Vec<Certified>; 2] = [
        sha_certified(p, 0, dmax / 2, precision),
        sha_certified(p, 1, dmax / 2, precision),
    ];
    Ok((0..=dmax)
        .map(|d| {
            let r = (d % 2) as usize;
            let s = &sha[r][(d / 2) as usize].value * &half;
            let diff = (&a[d as usize].value - &s).abs();
            MixtureRow {
                d,
                a_d: to_f64(&a[d as usize].value),
                half_sha: to_f64(&s),
                residual: to_f64(&diff),
            }
        })
        .collect())
}

pub fn mixture_residual(p: u64, dmax: u32, precision: u32) -> Result<f64> {
    Ok(mixture_table(p, dmax, precision)?
        .iter()
        .map(|row| row.residual)
        .fold(0.0, f64::max))
}

/// Prime factorization by trial division.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// `2^{omega(n) - 1} prod_{p | n} a_{d_p}(p)` when all `d_p` share a parity, else 0.
pub fn seln_pmf(n_sf: u64, dims: &BTreeMap<u64, u64>, precision: u32) -> Result<f64> {
    if n_sf < 2 {
        return Err(Error::InvalidArgument("n must exceed 1".into()));
    }
    let factors = factorize(n_sf);
    if factors.iter().any(|&(_, e)| e > 1) {
        return Err(Error::InvalidArgument(format!("{n_sf} is not squarefree")));
    }
    let primes: Vec<u64> = factors.iter().map(|&(q, _)| q).collect();
    if !dims.keys().copied().eq(primes.iter().copied()) {
        return Err(Error::InvalidArgument(format!(
            "dims must be keyed exactly by the primes {primes:?}"
        )));
    }
    let parities: Vec<u64> = dims.values().map(|d| d % 2).collect();
    if parities.windows(2).any(|w| w[0] != w[1]) {
        return Ok(0.0);
    }
    let mut value = rat(pow(2, primes.len() as u32 - 1));
    for (&q, &d) in dims {
        let d =
            u32::try_from(d).map_err(|_| Error::InvalidArgument("dimension too large".into()))?;
        let a = a_limit_certified(q, d, precision);
        value *= &a[d as usize].value;
    }
    Ok(to_f64(&value))
}

/// The law of `X + k`.
pub fn shift_pmf(pmf: &Pmf, k: u64) -> Pmf {
    Pmf {
        support: pmf.support.iter().map(|d| d + k).collect(),
        ..pmf.clone()
    }
}
