//! Compatible chains of maximal isotropic subspaces across the truncations
//! `H^1 ⊂ H^2 ⊂ .. ⊂ H^L` of an infinite hyperbolic space.
//!
//! Level `n` is the span of the first `n` hyperbolic pairs, with
//! coordinates `e_1..e_n, f_1..f_n`. The projection from level `n+1` to
//! level `n` is `push_mis` along the isotropic line `span(e_{n+1})`; its
//! subquotient `e_{n+1}^perp / e_{n+1}` is identified with level `n`.
//!
//! A chain is grown one level at a time. The fiber over `Z_n` consists of
//! the `p^n + 1` subspaces
//!
//! * `Z_n + F e_{n+1}`, and
//! * `{w + λ(w) e_{n+1}} + F (f_{n+1} + y)` for each functional `λ` on `Z_n`,
//!   where `y` is an isotropic solution of `<y, w> = -λ(w)` on `Z_n`,
//!
//! and one of them is drawn uniformly.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::Serialize;

use crate::distributions::{dist_a_dn, dist_a_limit, DEFAULT_PRECISION};
use crate::enumeration::{enumerate_mis_with, EnumConfig};
use crate::error::{Error, Result};
use crate::field::{check_small_prime, inv_mod, mul_mod, neg_mod, FpVec};
use crate::linalg::{rank, Subspace};
use crate::montecarlo::{add_counts, TrialPlan};
use crate::qspace::{make_hyperbolic, push_mis, QuadraticSpace};
use crate::rng::{RecipBernoulli, RngStream};
use crate::stats::{chi_square_gof, z_score, ChiSquare};

#[derive(Clone, Debug)]
pub struct Tower {
    p: u8,
    levels: usize,
    ambient: QuadraticSpace,
    spaces: Vec<QuadraticSpace>,
    /// `W̃` is chosen on the step to level `n+1` with probability `1 / (p^n + 1)`.
    extend: Vec<RecipBernoulli>,
}

pub fn build_tower(p: u64, levels: usize) -> Result<Tower> {
    let p8 = check_small_prime(p)?;
    if levels == 0 {
        return Err(Error::InvalidArgument(
            "a tower needs at least one level".into(),
        ));
    }
    let spaces = (1..=levels)
        .map(|n| make_hyperbolic(p, n))
        .collect::<Result<Vec<_>>>()?;
    let mut power = BigUint::from(1u32);
    let extend = (0..levels)
        .map(|_| {
            let b = RecipBernoulli::new(&(&power + 1u32));
            power *= p;
            b
        })
        .collect();
    Ok(Tower {
        p: p8,
        levels,
        ambient: make_hyperbolic(p, levels)?,
        spaces,
        extend,
    })
}

impl Tower {
    pub fn prime(&self) -> u64 {
        self.p as u64
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// The hyperbolic space at level `n`, `1 <= n <= L`.
    pub fn space(&self, n: usize) -> &QuadraticSpace {
        &self.spaces[n - 1]
    }

    /// `W_n = span(e_1..e_n)`.
    pub fn reference(&self, n: usize) -> Subspace {
        let units = (0..n).map(|i| FpVec::unit(self.p, 2 * n, i));
        Subspace::span(self.p, 2 * n, units).expect("unit vectors have matching length")
    }

    /// The projection from level `n + 1` to level `n`.
    pub fn project(&self, n: usize, z: &Subspace) -> Result<Subspace> {
        if n == 0 || n >= self.levels {
            return Err(Error::InvalidArgument(format!(
                "no projection out of level {}",
                n + 1
            )));
        }
        let upper = self.space(n + 1);
        let x = Subspace::span(self.p, 2 * n + 2, [FpVec::unit(self.p, 2 * n + 2, n)])?;
        push_mis(upper, &x, z)
    }

    /// Exhaustively checks the projection from level `n + 1`: `W_{n+1} ↦ W_n` and all fibers of size `p^n + 1`.
    pub fn check_projection(&self, n: usize, config: &EnumConfig) -> Result<ProjectionCheck> {
        let sends_reference = self.project(n, &self.reference(n + 1))? == self.reference(n);
        let upper = enumerate_mis_with(self.space(n + 1), config)?;
        let mut fibers: BTreeMap<Subspace, usize> = BTreeMap::new();
        for z in upper.members() {
            *fibers.entry(self.project(n, z)?).or_default() += 1;
        }
        let mut fiber_sizes = BTreeMap::new();
        for size in fibers.values() {
            *fiber_sizes.entry(*size).or_default() += 1;
        }
        Ok(ProjectionCheck {
            level: n,
            sends_reference,
            expected_fiber: (self.p as usize).pow(n as u32) + 1,
            fiber_sizes,
            images: fibers.len(),
        })
    }

    /// Lower-level coordinates of an ambient vector supported on the first `n` pairs.
    fn restrict(&self, v: &FpVec, n: usize) -> FpVec {
        let l = self.levels;
        v.slice(0, n).concat(&v.slice(l, l + n))
    }

    fn walker(&self) -> Walker<'_> {
        Walker {
            tower: self,
            n: 0,
            z: Vec::with_capacity(self.levels),
            y: Vec::with_capacity(self.levels),
            d: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionCheck {
    pub level: usize,
    pub sends_reference: bool,
    pub expected_fiber: usize,
    /// fiber size -> number of images with that fiber size
    pub fiber_sizes: BTreeMap<usize, usize>,
    pub images: usize,
}

impl ProjectionCheck {
    pub fn holds(&self) -> bool {
        self.sends_reference
            && self.fiber_sizes.len() == 1
            && self.fiber_sizes.contains_key(&self.expected_fiber)
    }
}

/// The current member `Z_n` as a basis `z` in ambient coordinates, with a
/// dual family `y` inside level `n` satisfying `<y_i, z_j> = δ_ij`.
struct Walker<'a> {
    tower: &'a Tower,
    n: usize,
    z: Vec<FpVec>,
    y: Vec<FpVec>,
    /// `dim(Z_n ∩ W_n)`
    d: usize,
}

impl Walker<'_> {
    fn pair(&self, a: &FpVec, b: &FpVec) -> u8 {
        self.tower.ambient.pairing_unchecked(a, b).numerator() as u8
    }

    /// Moves to a uniform member of the fiber over `Z_n`; returns whether `d` changed.
    fn step(&mut self, rng: &mut RngStream) -> bool {
        let (p, l, n) = (self.tower.p, self.tower.levels, self.n);
        let dim = 2 * l;
        let e = FpVec::unit(p, dim, n);
        let f = FpVec::unit(p, dim, l + n);
        self.n += 1;
        if self.tower.extend[n].sample(rng) {
            self.z.push(e);
            self.y.push(f);
            self.d += 1;
            return true;
        }
        let lambda: Vec<u8> = (0..n).map(|_| rng.uniform_below(p as u64) as u8).collect();
        let mut y = FpVec::zeros(p, dim);
        for (yi, &c) in self.y.iter().zip(&lambda) {
            y.add_scaled(yi, neg_mod(c, p));
        }
        let q = self.tower.ambient.eval_q_unchecked(&y).numerator() as u8;
        if q != 0 {
            let k = lambda
                .iter()
                .position(|&c| c != 0)
                .expect("y = 0 when λ = 0");
            y.add_scaled(&self.z[k], mul_mod(q, inv_mod(lambda[k], p), p));
        }
        for (zi, &c) in self.z.iter_mut().zip(&lambda) {
            zi.set(n, c);
        }
        let shifts: Vec<u8> = self.y.iter().map(|yi| self.pair(yi, &y)).collect();
        for (yi, s) in self.y.iter_mut().zip(shifts) {
            yi.set(n, neg_mod(s, p));
        }
        let mut top = f;
        top.add(&y);
        self.z.push(top);
        self.y.push(e);
        false
    }

    fn member(&self) -> Subspace {
        let n = self.n;
        let rows = self.z.iter().map(|v| self.tower.restrict(v, n));
        Subspace::span(self.tower.p, 2 * n, rows).expect("restricted rows have matching length")
    }

    /// `dim(Z_n ∩ W_n)` computed from the basis: `n` minus the rank of the `f`-coordinates.
    fn intersection_by_rank(&self) -> usize {
        let l = self.tower.levels;
        let n = self.n;
        n - rank(self.z.iter().map(|v| v.slice(l, l + n)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerChain {
    pub members: Vec<Subspace>,
}

impl TowerChain {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `Z_n`, `1 <= n <= L`.
    pub fn level(&self, n: usize) -> &Subspace {
        &self.members[n - 1]
    }
}

pub fn sample_chain(tower: &Tower, rng: &mut RngStream) -> TowerChain {
    let mut walker = tower.walker();
    let mut members = Vec::with_capacity(tower.levels);
    for _ in 0..tower.levels {
        walker.step(rng);
        members.push(walker.member());
    }
    TowerChain { members }
}

/// `d_n = dim(Z_n ∩ W_n)` for `n = 1..=L`.
pub fn intersection_trajectory(chain: &TowerChain, tower: &Tower) -> Vec<usize> {
    chain
        .members
        .iter()
        .enumerate()
        .map(|(i, z)| z.intersection_dim(&tower.reference(i + 1)))
        .collect()
}

/// Checks `project(Z_{n+1}) = Z_n` for every level of the chain.
pub fn is_compatible(chain: &TowerChain, tower: &Tower) -> Result<bool> {
    for n in 1..chain.len() {
        if tower.project(n, chain.level(n + 1))? != *chain.level(n) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Default)]
struct Tally {
    final_counts: Vec<u64>,
    changes: Vec<u64>,
    /// `joint[i][j]`, `i < j`: trials changing at both levels `i+1` and `j+1`
    joint: Vec<Vec<u64>>,
}

impl Tally {
    fn new(levels: usize) -> Self {
        Tally {
            final_counts: Vec::new(),
            changes: vec![0; levels],
            joint: vec![vec![0; levels]; levels],
        }
    }

    fn merge(&mut self, other: Tally) {
        add_counts(&mut self.final_counts, other.final_counts);
        add_counts(&mut self.changes, other.changes);
        for (row, part) in self.joint.iter_mut().zip(other.joint) {
            add_counts(row, part);
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelChange {
    pub level: usize,
    pub changes: u64,
    pub fraction: f64,
    /// `1 / (p^{n-1} + 1)`
    pub expected: f64,
    pub z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionRow {
    pub d: usize,
    pub count: u64,
    pub empirical: f64,
    pub limit: f64,
    pub z_limit: f64,
    pub finite: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitEstimate {
    pub p: u64,
    pub levels: usize,
    pub trials: u64,
    pub dimensions: Vec<DimensionRow>,
    /// Pearson test of `d_L` against the exact law of `X_L`.
    pub chi_square_finite: ChiSquare,
    pub level_changes: Vec<LevelChange>,
    pub max_abs_correlation: f64,
    pub correlation_bound: f64,
    /// Empirical `E(p^{d_L})`, to compare with `p + 1`.
    pub mean_p_pow_d: f64,
}

impl LimitEstimate {
    pub fn empirical(&self, d: usize) -> f64 {
        self.dimensions.get(d).map_or(0.0, |r| r.empirical)
    }
}

/// Walks `trials` chains to level `L` and summarizes `d_L` and the per-level changes.
pub fn estimate_limit_pmf(tower: &Tower, plan: &TrialPlan) -> Result<LimitEstimate> {
    if plan.trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let levels = tower.levels;
    let tally = plan.run(
        || Tally::new(levels),
        |acc: &mut Tally, rng| {
            let mut walker = tower.walker();
            let mut changed = Vec::with_capacity(levels);
            for level in 0..levels {
                if walker.step(rng) {
                    acc.changes[level] += 1;
                    changed.push(level);
                }
            }
            for (a, &i) in changed.iter().enumerate() {
                for &j in &changed[a + 1..] {
                    acc.joint[i][j] += 1;
                }
            }
            let d = walker.d;
            assert_eq!(
                d,
                walker.intersection_by_rank(),
                "incremental dimension drifted"
            );
            if acc.final_counts.len() <= d {
                acc.final_counts.resize(d + 1, 0);
            }
            acc.final_counts[d] += 1;
        },
        Tally::merge,
    );
    Ok(summarize(tower, plan.trials, tally))
}

fn summarize(tower: &Tower, trials: u64, tally: Tally) -> LimitEstimate {
    let (p, levels) = (tower.prime(), tower.levels);
    let finite = dist_a_dn(p, levels as u32).expect("prime checked at construction");
    let top = tally.final_counts.len().max(8);
    let limit = dist_a_limit(p, top as u32, DEFAULT_PRECISION).expect("prime checked");
    let nf = trials as f64;
    let dimensions = (0..top)
        .map(|d| {
            let count = tally.final_counts.get(d).copied().unwrap_or(0);
            let reference = limit.probs_float[d];
            DimensionRow {
                d,
                count,
                empirical: count as f64 / nf,
                limit: reference,
                z_limit: z_score(count, trials, reference),
                finite: finite.prob(d as u64),
            }
        })
        .collect();
    let chi_square_finite = chi_square_gof(&tally.final_counts, &finite.probs_float);
    let expected: Vec<f64> = (0..levels)
        .map(|n| 1.0 / ((p as f64).powi(n as i32) + 1.0))
        .collect();
    let level_changes = (0..levels)
        .map(|n| LevelChange {
            level: n + 1,
            changes: tally.changes[n],
            fraction: tally.changes[n] as f64 / nf,
            expected: expected[n],
            z: z_score(tally.changes[n], trials, expected[n]),
        })
        .collect();
    let mut max_abs_correlation = 0.0f64;
    for i in 0..levels {
        for j in i + 1..levels {
            let (pi, pj) = (tally.changes[i] as f64 / nf, tally.changes[j] as f64 / nf);
            let pij = tally.joint[i][j] as f64 / nf;
            let denom = (pi * (1.0 - pi) * pj * (1.0 - pj)).sqrt();
            if denom > 0.0 {
                max_abs_correlation = max_abs_correlation.max(((pij - pi * pj) / denom).abs());
            }
        }
    }
    let mean_p_pow_d = tally
        .final_counts
        .iter()
        .enumerate()
        .map(|(d, &c)| (p as f64).powi(d as i32) * c as f64)
        .sum::<f64>()
        / nf;
    LimitEstimate {
        p,
        levels,
        trials,
        dimensions,
        chi_square_finite,
        level_changes,
        max_abs_correlation,
        correlation_bound: 4.0 / nf.sqrt(),
        mean_p_pow_d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::enumerate_mis;
    use crate::stats::binomial_sigma;

    #[test]
    fn construction() {
        let t = build_tower(2, 3).unwrap();
        let dims: Vec<usize> = (1..=3).map(|n| t.space(n).dim()).collect();
        assert_eq!(dims, vec![2, 4, 6]);
        assert!(build_tower(4, 3).is_err());
        assert!(build_tower(2, 0).is_err());
        assert_eq!(t.project(1, &t.reference(2)).unwrap(), t.reference(1));
    }

    #[test]
    fn projection_fibers() {
        let t = build_tower(2, 3).unwrap();
        for n in 1..=2 {
            let check = t.check_projection(n, &EnumConfig::default()).unwrap();
            assert!(check.holds(), "{check:?}");
        }
        let t3 = build_tower(3, 2).unwrap();
        assert!(t3
            .check_projection(1, &EnumConfig::default())
            .unwrap()
            .holds());
    }

    #[test]
    fn chains_are_compatible_and_maximal() {
        for p in [2u64, 3, 5] {
            let t = build_tower(p, 4).unwrap();
            let mut rng = RngStream::new(3, p);
            for _ in 0..40 {
                let chain = sample_chain(&t, &mut rng);
                assert!(is_compatible(&chain, &t).unwrap());
                for n in 1..=4 {
                    assert!(t.space(n).is_maximal_isotropic(chain.level(n)).unwrap());
                }
                let traj = intersection_trajectory(&chain, &t);
                assert!(traj[0] <= 1);
                assert!(traj.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1));
            }
        }
    }

    #[test]
    fn incremental_dimension_matches_rank() {
        let t = build_tower(3, 6).unwrap();
        let mut rng = RngStream::new(8, 0);
        for _ in 0..200 {
            let mut w = t.walker();
            for _ in 0..6 {
                w.step(&mut rng);
                assert_eq!(w.d, w.intersection_by_rank());
                assert_eq!(w.d, w.member().intersection_dim(&t.reference(w.n)));
            }
        }
    }

    #[test]
    fn level_marginals_are_uniform() {
        let t = build_tower(2, 2).unwrap();
        let level1 = enumerate_mis(t.space(1)).unwrap();
        let level2 = enumerate_mis(t.space(2)).unwrap();
        let mut rng = RngStream::new(17, 0);
        let trials = 100_000u64;
        let (mut c1, mut c2) = (vec![0u64; 2], vec![0u64; 6]);
        for _ in 0..trials {
            let chain = sample_chain(&t, &mut rng);
            c1[level1.index_of(chain.level(1)).unwrap()] += 1;
            c2[level2.index_of(chain.level(2)).unwrap()] += 1;
        }
        let sigma = binomial_sigma(0.5, trials);
        for c in c1 {
            assert!((c as f64 / trials as f64 - 0.5).abs() <= 3.0 * sigma);
        }
        assert!(chi_square_gof(&c2, &[1.0 / 6.0; 6]).p_value > 0.001);
    }

    #[test]
    fn small_estimate() {
        let t = build_tower(2, 8).unwrap();
        let est = estimate_limit_pmf(&t, &TrialPlan::new(5, 40_000)).unwrap();
        assert!(est.chi_square_finite.p_value > 0.001);
        for change in &est.level_changes {
            assert!(change.z.abs() < 4.0, "{change:?}");
        }
        assert!(est.max_abs_correlation < 5.0 * est.correlation_bound);
    }
}
