//! Samplers for uniform maximal isotropic subspaces, `X_n` and `X_{Sel_p}`.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::field::{check_prime, FpVec};
use crate::linalg::Subspace;
use crate::qspace::{quarter_reduce, QuadraticSpace};
use crate::rng::{RecipBernoulli, RngStream};

const MAX_REJECTIONS: usize = 1 << 22;

/// Uniform element of `I_V`, built one uniformly chosen isotropic direction of `S^perp / S` at a time.
///
/// Every maximal isotropic subspace is reached by the same number of ordered
/// choices, each made with the same probability, so the result is uniform.
pub fn sample_mis_uniform(space: &QuadraticSpace, rng: &mut RngStream) -> Result<Subspace> {
    if !space.is_nondegenerate() || !space.dim().is_multiple_of(2) {
        return Err(Error::InvalidSpace(
            "sampling needs a nondegenerate even-dimensional space".into(),
        ));
    }
    if space.scale() == 2 {
        let reduction = quarter_reduce(space)?;
        let w = sample_mis_uniform(reduction.reduced(), rng)?;
        return Ok(reduction.lift_subspace(&w));
    }
    let (p, dim) = (space.prime(), space.dim());
    let mut s = Subspace::zero(p, dim);
    for _ in 0..dim / 2 {
        let perp = space.perp(&s)?;
        let complement = s.complement_in(&perp);
        let v = draw_isotropic(space, &complement, rng)?;
        s = s.with_vector(&v);
    }
    Ok(s)
}

/// Uniform nonzero `Q`-isotropic vector of `span(basis)`, by rejection.
fn draw_isotropic(space: &QuadraticSpace, basis: &[FpVec], rng: &mut RngStream) -> Result<FpVec> {
    let p = space.prime();
    for _ in 0..MAX_REJECTIONS {
        let mut v = FpVec::zeros(p, space.dim());
        for b in basis {
            v.add_scaled(b, rng.uniform_below(p as u64) as u8);
        }
        if !v.is_zero() && space.eval_q_unchecked(&v).is_zero() {
            return Ok(v);
        }
    }
    Err(Error::InvalidSpace(
        "no isotropic vector found; space is not weakly metabolic".into(),
    ))
}

/// Sum of independent `B_i ~ Bernoulli(1 / (p^{i-1} + 1))`, `i = 1..=n`.
#[derive(Clone, Debug)]
pub struct BernoulliSum {
    p: u64,
    terms: Vec<RecipBernoulli>,
}

impl BernoulliSum {
    pub fn new(p: u64, n: usize) -> Result<Self> {
        check_prime(p)?;
        let mut power = BigUint::from(1u32);
        let terms = (0..n)
            .map(|_| {
                let b = RecipBernoulli::new(&(&power + 1u32));
                power *= p;
                b
            })
            .collect();
        Ok(BernoulliSum { p, terms })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn sample(&self, rng: &mut RngStream) -> usize {
        self.terms.iter().filter(|b| b.sample(rng)).count()
    }

    /// The individual indicators `B_1..B_n` of one draw.
    pub fn sample_indicators(&self, rng: &mut RngStream) -> Vec<bool> {
        self.terms.iter().map(|b| b.sample(rng)).collect()
    }
}

pub fn sample_xn(p: u64, n: usize, rng: &mut RngStream) -> Result<usize> {
    Ok(BernoulliSum::new(p, n)?.sample(rng))
}

pub const DEFAULT_EPS: f64 = 1e-9;

/// Smallest `N` with the geometric tail bound `sum_{i>N} p^{-(i-1)} = p^{1-N}/(p-1) < eps`.
pub fn xsel_truncation(p: u64, eps: f64) -> Result<usize> {
    check_prime(p)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let pf = p as f64;
    let mut n = 0usize;
    while pf.powi(1 - n as i32) / (pf - 1.0) >= eps {
        n += 1;
    }
    Ok(n)
}

/// `X_{Sel_p}` truncated so that the total-variation error is below `eps`.
pub fn xsel_sampler(p: u64, eps: f64) -> Result<BernoulliSum> {
    BernoulliSum::new(p, xsel_truncation(p, eps)?)
}

pub fn sample_xsel(p: u64, eps: f64, rng: &mut RngStream) -> Result<usize> {
    Ok(xsel_sampler(p, eps)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::enumerate_mis;
    use crate::qspace::{make_hyperbolic, make_quarter_block};
    use crate::stats::binomial_sigma;

    #[test]
    fn zero_dimensional_space() {
        let h = make_hyperbolic(3, 0).unwrap();
        let mut rng = RngStream::new(0, 0);
        assert_eq!(
            sample_mis_uniform(&h, &mut rng).unwrap(),
            Subspace::zero(3, 0)
        );
        assert_eq!(sample_xn(3, 0, &mut rng).unwrap(), 0);
    }

    #[test]
    fn hyperbolic_plane_is_fair() {
        let h = make_hyperbolic(2, 1).unwrap();
        let mis = enumerate_mis(&h).unwrap();
        let mut rng = RngStream::new(5, 0);
        let n = 10_000u64;
        let mut hits = 0;
        for _ in 0..n {
            let z = sample_mis_uniform(&h, &mut rng).unwrap();
            let k = mis.index_of(&z).expect("sample is maximal isotropic");
            hits += (k == 0) as u64;
        }
        let sigma = binomial_sigma(0.5, n);
        assert!((hits as f64 / n as f64 - 0.5).abs() <= 3.0 * sigma);
    }

    #[test]
    fn quarter_samples_are_maximal_isotropic() {
        let qb = make_quarter_block(3).unwrap();
        let mut rng = RngStream::new(9, 1);
        for _ in 0..50 {
            let z = sample_mis_uniform(&qb, &mut rng).unwrap();
            assert!(qb.is_maximal_isotropic(&z).unwrap());
        }
    }

    #[test]
    fn truncation_levels() {
        // 2^{1-N} < 1e-9 first holds at N = 31
        assert_eq!(xsel_truncation(2, 1e-9).unwrap(), 31);
        assert!(xsel_truncation(2, 0.0).is_err());
        assert!(xsel_truncation(4, 0.5).is_err());
    }

    #[test]
    fn anisotropic_space_is_rejected() {
        let aniso = QuadraticSpace::new(2, 1, vec![1, 1], vec![vec![0, 1], vec![1, 0]]).unwrap();
        let mut rng = RngStream::new(0, 0);
        assert!(sample_mis_uniform(&aniso, &mut rng).is_err());
    }
}
