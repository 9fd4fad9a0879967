//! Exhaustive enumeration of maximal isotropic subspaces.
//!
//! These routines are exponential in the dimension and serve as the
//! brute-force oracle for the closed forms and samplers.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::field::check_prime;
use crate::linalg::Subspace;
use crate::qspace::{subquotient, QuadraticSpace};

/// Environment variable overriding [`EnumConfig::default`]'s cap.
pub const MAX_ENUM_ENV: &str = "ISOFORM_MAX_ENUM";
pub const DEFAULT_MAX_CANONICALIZATIONS: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumConfig {
    pub max_canonicalizations: u64,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            max_canonicalizations: DEFAULT_MAX_CANONICALIZATIONS,
        }
    }
}

impl EnumConfig {
    /// Default cap, overridden by `ISOFORM_MAX_ENUM` when it parses as an integer.
    pub fn from_env() -> Self {
        std::env::var(MAX_ENUM_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .map(|max_canonicalizations| EnumConfig {
                max_canonicalizations,
            })
            .unwrap_or_default()
    }
}

/// All maximal isotropic subspaces of a space, sorted by canonical form.
#[derive(Clone, Debug)]
pub struct MisSet {
    space: QuadraticSpace,
    members: Vec<Subspace>,
}

impl MisSet {
    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn members(&self) -> &[Subspace] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn index_of(&self, s: &Subspace) -> Option<usize> {
        self.members.binary_search(s).ok()
    }
}

pub fn enumerate_mis(space: &QuadraticSpace) -> Result<MisSet> {
    enumerate_mis_with(space, &EnumConfig::from_env())
}

/// Extends isotropic subspaces one isotropic vector of their perp at a time,
/// deduplicating canonical forms at every dimension.
pub fn enumerate_mis_with(space: &QuadraticSpace, config: &EnumConfig) -> Result<MisSet> {
    if !space.is_nondegenerate() {
        return Err(Error::InvalidSpace(
            "enumeration needs a nondegenerate space".into(),
        ));
    }
    let (p, dim) = (space.prime(), space.dim());
    if dim % 2 != 0 {
        return Ok(MisSet {
            space: space.clone(),
            members: Vec::new(),
        });
    }
    let mut budget = config.max_canonicalizations;
    let mut level: BTreeSet<Subspace> = BTreeSet::from([Subspace::zero(p, dim)]);
    for _ in 0..dim / 2 {
        let mut next = BTreeSet::new();
        for s in &level {
            let perp = space.perp(s)?;
            let complement = Subspace::span(p, dim, s.complement_in(&perp))?;
            for c in complement.projective_points() {
                if !space.eval_q_unchecked(&c).is_zero() {
                    continue;
                }
                if budget == 0 {
                    return Err(Error::EnumerationCap {
                        cap: config.max_canonicalizations,
                    });
                }
                budget -= 1;
                next.insert(s.with_vector(&c));
            }
        }
        level = next;
    }
    let members: Vec<Subspace> = level.into_iter().collect();
    debug_assert!(members
        .iter()
        .all(|m| space.is_maximal_isotropic(m).unwrap_or(false)));
    Ok(MisSet {
        space: space.clone(),
        members,
    })
}

/// All isotropic lines of a space.
pub fn isotropic_lines(space: &QuadraticSpace) -> Vec<Subspace> {
    let (p, dim) = (space.prime(), space.dim());
    Subspace::whole(p, dim)
        .projective_points()
        .filter(|v| space.eval_q_unchecked(v).is_zero())
        .map(|v| Subspace::from_rows_unchecked(p, dim, vec![v]))
        .collect()
}

/// `prod_{j=0}^{n-1} (p^j + 1)`.
pub fn count_mis_closed(p: u64, n: u32) -> Result<BigUint> {
    check_prime(p)?;
    Ok((0..n).map(|j| BigUint::from(p).pow(j) + 1u32).product())
}

/// `prod_{i=1}^{k} (p^{n-i} + 1)`, the size of every fiber of the push map along a `k`-dimensional isotropic subspace.
pub fn fiber_size_closed(p: u64, n: u32, k: u32) -> Result<BigUint> {
    check_prime(p)?;
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    Ok((1..=k)
        .map(|i| BigUint::from(p).pow(n - i) + 1u32)
        .product())
}

/// Outcome of grouping `I_V` by the push map along `x`.
#[derive(Clone, Debug)]
pub struct FiberCheck {
    pub expected: BigUint,
    /// fiber size -> number of quotient members with that fiber size
    pub sizes: BTreeMap<u64, usize>,
    pub quotient_members: usize,
}

impl FiberCheck {
    pub fn holds(&self) -> bool {
        self.sizes.len() == 1
            && self
                .sizes
                .keys()
                .next()
                .is_some_and(|&s| BigUint::from(s) == self.expected)
    }
}

pub fn verify_fibers(space: &QuadraticSpace, x: &Subspace) -> Result<FiberCheck> {
    let config = EnumConfig::from_env();
    let all = enumerate_mis_with(space, &config)?;
    verify_fibers_in(&all, x, &config)
}

pub fn verify_fibers_in(all: &MisSet, x: &Subspace, config: &EnumConfig) -> Result<FiberCheck> {
    let space = all.space();
    let sq = subquotient(space, x)?;
    let quotient = enumerate_mis_with(sq.space(), config)?;
    let mut fibers = vec![0u64; quotient.len()];
    for w in all.members() {
        let image = sq.push(w)?;
        let k = quotient
            .index_of(&image)
            .ok_or(Error::NotMaximalIsotropic)?;
        fibers[k] += 1;
    }
    let mut sizes = BTreeMap::new();
    for f in fibers {
        *sizes.entry(f).or_insert(0) += 1;
    }
    let n = (space.dim() / 2) as u32;
    Ok(FiberCheck {
        expected: fiber_size_closed(space.prime() as u64, n, x.dim() as u32)?,
        sizes,
        quotient_members: quotient.len(),
    })
}

/// Counts of `dim(Z ∩ W)` over all maximal isotropic `Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    pub counts: BTreeMap<usize, u64>,
    pub total: u64,
}

impl Histogram {
    pub fn from_dims(dims: impl IntoIterator<Item = usize>) -> Self {
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for d in dims {
            *counts.entry(d).or_insert(0) += 1;
            total += 1;
        }
        Histogram { counts, total }
    }

    pub fn count(&self, d: usize) -> u64 {
        self.counts.get(&d).copied().unwrap_or(0)
    }

    pub fn max_dim(&self) -> usize {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    /// `counts[d] / total` as exact rationals for `d = 0..=max_dim`.
    pub fn probabilities(&self) -> Vec<BigRational> {
        (0..=self.max_dim())
            .map(|d| BigRational::new(self.count(d).into(), self.total.into()))
            .collect()
    }

    pub fn shifted(&self, k: usize) -> Histogram {
        Histogram {
            counts: self.counts.iter().map(|(&d, &c)| (d + k, c)).collect(),
            total: self.total,
        }
    }

    pub fn even_count(&self) -> u64 {
        self.counts
            .iter()
            .filter(|(d, _)| *d % 2 == 0)
            .map(|(_, c)| c)
            .sum()
    }
}

pub fn intersection_histogram(space: &QuadraticSpace, w: &Subspace) -> Result<Histogram> {
    let all = enumerate_mis(space)?;
    intersection_histogram_in(&all, w)
}

pub fn intersection_histogram_in(all: &MisSet, w: &Subspace) -> Result<Histogram> {
    if !all.space().is_maximal_isotropic(w)? {
        return Err(Error::NotMaximalIsotropic);
    }
    Ok(Histogram::from_dims(
        all.members().iter().map(|z| z.intersection_dim(w)),
    ))
}

/// Exact probability vector of a histogram; sums to one.
pub fn histogram_pmf(h: &Histogram) -> Vec<BigRational> {
    let probs = h.probabilities();
    debug_assert!(probs.iter().sum::<BigRational>() == BigRational::one() || h.total == 0);
    probs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FpVec;
    use crate::qspace::{make_hyperbolic, make_quarter_block};

    /// Brute force: every subspace spanned by n vectors, kept when maximal isotropic.
    fn brute_force_mis(space: &QuadraticSpace) -> BTreeSet<Subspace> {
        let (p, dim) = (space.prime(), space.dim());
        let n = dim / 2;
        let vectors: Vec<FpVec> = FpVec::all(p, dim).collect();
        let mut out = BTreeSet::new();
        let mut idx = vec![0usize; n];
        loop {
            let s = Subspace::span(p, dim, idx.iter().map(|&i| vectors[i].clone())).unwrap();
            if s.dim() == n && space.is_maximal_isotropic(&s).unwrap() {
                out.insert(s);
            }
            let mut k = 0;
            loop {
                if k == n {
                    return out;
                }
                idx[k] += 1;
                if idx[k] < vectors.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for (p, n) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
            let h = make_hyperbolic(p, n).unwrap();
            let got: BTreeSet<Subspace> = enumerate_mis(&h)
                .unwrap()
                .members()
                .iter()
                .cloned()
                .collect();
            assert_eq!(got, brute_force_mis(&h), "p={p} n={n}");
        }
    }

    #[test]
    fn enumeration_examples() {
        let h = make_hyperbolic(2, 1).unwrap();
        let mis = enumerate_mis(&h).unwrap();
        let expected = vec![
            h.subspace(&[&[0, 1]]).unwrap(),
            h.subspace(&[&[1, 0]]).unwrap(),
        ];
        let mut sorted = expected.clone();
        sorted.sort();
        assert_eq!(mis.members(), sorted.as_slice());
        assert_eq!(
            enumerate_mis(&make_hyperbolic(2, 2).unwrap())
                .unwrap()
                .len(),
            6
        );
        assert_eq!(
            enumerate_mis(&make_hyperbolic(3, 2).unwrap())
                .unwrap()
                .len(),
            8
        );
        assert_eq!(
            enumerate_mis(&make_hyperbolic(5, 0).unwrap())
                .unwrap()
                .len(),
            1
        );
    }

    #[test]
    fn closed_forms() {
        assert_eq!(count_mis_closed(2, 3).unwrap(), BigUint::from(30u32));
        assert_eq!(count_mis_closed(7, 0).unwrap(), BigUint::from(1u32));
        assert_eq!(count_mis_closed(5, 2).unwrap(), BigUint::from(12u32));
        assert_eq!(fiber_size_closed(2, 2, 1).unwrap(), BigUint::from(3u32));
        assert_eq!(fiber_size_closed(5, 4, 0).unwrap(), BigUint::from(1u32));
        assert_eq!(fiber_size_closed(2, 3, 2).unwrap(), BigUint::from(15u32));
        assert!(fiber_size_closed(2, 2, 3).is_err());
        assert!(count_mis_closed(9, 2).is_err());
        for (p, n) in [(2u64, 3u32), (5, 2)] {
            let h = make_hyperbolic(p, n as usize).unwrap();
            let count = enumerate_mis(&h).unwrap().len();
            assert_eq!(BigUint::from(count), count_mis_closed(p, n).unwrap());
        }
    }

    #[test]
    fn cap_is_enforced() {
        let h = make_hyperbolic(2, 3).unwrap();
        let err = enumerate_mis_with(
            &h,
            &EnumConfig {
                max_canonicalizations: 10,
            },
        )
        .unwrap_err();
        assert_eq!(err, Error::EnumerationCap { cap: 10 });
    }

    #[test]
    fn fiber_examples() {
        let h = make_hyperbolic(2, 2).unwrap();
        let check = verify_fibers(&h, &h.subspace(&[&[1, 0, 0, 0]]).unwrap()).unwrap();
        assert!(check.holds());
        assert_eq!(check.sizes, BTreeMap::from([(3, 2)]));

        let h3 = make_hyperbolic(3, 2).unwrap();
        for x in isotropic_lines(&h3) {
            let check = verify_fibers(&h3, &x).unwrap();
            assert!(check.holds());
            assert_eq!(check.expected, BigUint::from(4u32));
        }

        let trivial = verify_fibers(&h, &Subspace::zero(2, 4)).unwrap();
        assert!(trivial.holds());
        assert_eq!(trivial.sizes, BTreeMap::from([(1, 6)]));
    }

    #[test]
    fn histogram_examples() {
        let h = make_hyperbolic(2, 1).unwrap();
        let hist = intersection_histogram(&h, &h.subspace(&[&[1, 0]]).unwrap()).unwrap();
        assert_eq!(hist.counts, BTreeMap::from([(0, 1), (1, 1)]));

        let h = make_hyperbolic(2, 2).unwrap();
        let w = h.subspace(&[&[1, 0, 0, 0], &[0, 1, 0, 0]]).unwrap();
        let hist = intersection_histogram(&h, &w).unwrap();
        assert_eq!(hist.counts, BTreeMap::from([(0, 2), (1, 3), (2, 1)]));
        assert_eq!(hist.total, 6);
        assert_eq!(hist.even_count() * 2, hist.total);

        let qb = make_quarter_block(2).unwrap();
        let wq = qb.subspace(&[&[0, 1, 0, 0], &[0, 0, 1, 0]]).unwrap();
        let hq = intersection_histogram(&qb, &wq).unwrap();
        let h1 = make_hyperbolic(2, 1).unwrap();
        let base = intersection_histogram(&h1, &h1.subspace(&[&[1, 0]]).unwrap()).unwrap();
        assert_eq!(hq, base.shifted(1));
    }
}
