//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use isoform::distributions::{
    conditional_moment, dist_a_dn, mixture_residual, moment_by_summation, moment_finite,
    moment_limit, Parity,
};
use isoform::enumeration::{
    count_mis_closed, enumerate_mis, intersection_histogram_in, isotropic_lines, verify_fibers_in,
    EnumConfig, Histogram,
};
use isoform::montecarlo::TrialPlan;
use isoform::qspace::{make_hyperbolic, make_quarter_block};
use isoform::sampler::{sample_mis_uniform, xsel_sampler, BernoulliSum};
use isoform::stats::{binomial_sigma, chi_square_gof};
use isoform::tower::{build_tower, estimate_limit_pmf};
use isoform::{FpVec, Subspace};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn r(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn counting() -> Outcome {
    let start = Instant::now();
    let cases = [
        (2, 1),
        (2, 2),
        (2, 3),
        (2, 4),
        (3, 1),
        (3, 2),
        (3, 3),
        (5, 1),
        (5, 2),
    ];
    let mut bad = Vec::new();
    for (p, n) in cases {
        let found = enumerate_mis(&make_hyperbolic(p, n).unwrap())
            .unwrap()
            .len();
        // oracle: the product written out directly
        let expected: u64 = (0..n as u32).map(|j| p.pow(j) + 1).product();
        let closed = count_mis_closed(p, n as u32).unwrap();
        if found as u64 != expected || closed != BigUint::from(expected) {
            bad.push(format!(
                "({p},{n}): enumerated {found}, expected {expected}"
            ));
        }
    }
    let elapsed = start.elapsed();
    let ok = bad.is_empty() && elapsed < Duration::from_secs(60);
    outcome(
        ok,
        format!(
            "{} cases, {} mismatches {bad:?}, {}",
            cases.len(),
            bad.len(),
            secs(elapsed)
        ),
    )
}

fn fibers() -> Outcome {
    let start = Instant::now();
    let config = EnumConfig::default();
    let mut lines = 0;
    let mut bad = Vec::new();
    for (p, n) in [(2, 2), (2, 3), (3, 2)] {
        let space = make_hyperbolic(p, n).unwrap();
        let all = enumerate_mis(&space).unwrap();
        // fibers over X^perp/X ≅ H^{n-1}: prod_{i=1}^{1} (p^{n-i} + 1)
        let expected = p.pow(n as u32 - 1) as usize + 1;
        for x in isotropic_lines(&space) {
            lines += 1;
            let check = verify_fibers_in(&all, &x, &config).unwrap();
            let sizes_ok = check.sizes.len() == 1 && check.sizes.contains_key(&(expected as u64));
            if !check.holds() || !sizes_ok {
                bad.push(format!("({p},{n}) {x}: {:?}", check.sizes));
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = bad.is_empty() && elapsed < Duration::from_secs(60);
    outcome(
        ok,
        format!(
            "{lines} isotropic lines, {} bad {bad:?}, {}",
            bad.len(),
            secs(elapsed)
        ),
    )
}

/// Exact law of a sum of independent Bernoulli(1 / (p^{i-1} + 1)), by convolution.
fn bernoulli_law(p: u64, n: u32) -> Vec<BigRational> {
    let mut law = vec![BigRational::one()];
    for i in 1..=n {
        let q = r(1, p.pow(i - 1) as i64 + 1);
        let mut next = vec![BigRational::zero(); law.len() + 1];
        for (d, w) in law.iter().enumerate() {
            next[d] += w * (BigRational::one() - &q);
            next[d + 1] += w * &q;
        }
        law = next;
    }
    law
}

fn exact_pmf() -> Outcome {
    let mut pairs = 0;
    let mut bad = Vec::new();
    for (p, n) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3)] {
        let all = enumerate_mis(&make_hyperbolic(p, n).unwrap()).unwrap();
        let law = dist_a_dn(p, n as u32).unwrap().probs_exact.unwrap();
        if law != bernoulli_law(p, n as u32) {
            bad.push(format!("dist_a_dn({p},{n}) disagrees with convolution"));
        }
        for w in all.members() {
            pairs += 1;
            let mut probs = intersection_histogram_in(&all, w).unwrap().probabilities();
            probs.resize(law.len().max(probs.len()), BigRational::zero());
            if probs != law {
                bad.push(format!("({p},{n}) W = {w}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{pairs} (space, W) pairs, {} mismatches {bad:?}", bad.len()),
    )
}

fn parity() -> Outcome {
    let mut bad = Vec::new();
    for p in [2, 3, 5] {
        for n in 1..=10 {
            let law = dist_a_dn(p, n).unwrap().probs_exact.unwrap();
            let even: BigRational = law.iter().step_by(2).cloned().sum();
            if even != r(1, 2) {
                bad.push(format!("({p},{n}): {even}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("30 cases, {} off 1/2 {bad:?}", bad.len()),
    )
}

fn moments() -> Outcome {
    let mut bad = Vec::new();
    for p in [2u64, 3] {
        for n in 0..=8 {
            let law = bernoulli_law(p, n);
            for m in 0..=4u32 {
                let closed = moment_finite(p, n, m).unwrap();
                let summed: BigRational = law
                    .iter()
                    .enumerate()
                    .map(|(d, a)| {
                        a * BigRational::from_integer(num_bigint::BigInt::from(p).pow(m * d as u32))
                    })
                    .sum();
                if closed != summed || closed != moment_by_summation(p, n, m).unwrap() {
                    bad.push(format!("({p},{n},{m})"));
                }
            }
        }
    }
    for p in [2u64, 3, 5, 7] {
        if moment_limit(p, 1).unwrap() != BigUint::from(p + 1) {
            bad.push(format!("limit p={p}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!("90 finite + 4 limit checks, {} failures {bad:?}", bad.len()),
    )
}

fn conditional_moments() -> Outcome {
    let mut equalities = 0;
    let mut bad = Vec::new();
    let mut counterexamples = Vec::new();
    for p in [2u64, 3, 5] {
        for n in 1..=6u32 {
            for m in 0..=n {
                let unconditional = moment_finite(p, n, m).unwrap();
                let even = conditional_moment(p, n, m, Parity::Even).unwrap();
                let odd = conditional_moment(p, n, m, Parity::Odd).unwrap();
                if m < n {
                    equalities += 1;
                    if even != unconditional || odd != unconditional {
                        bad.push(format!("({p},{n},{m})"));
                    }
                } else if even != unconditional {
                    counterexamples.push((p, n, even, unconditional));
                } else {
                    bad.push(format!("no counterexample at ({p},{n},{m})"));
                }
            }
        }
    }
    // independent check of one counterexample: X_2 at p = 2 has law (1/3, 1/2, 1/6)
    let even_direct = (r(1, 3) + r(1, 6) * r(16, 1)) / r(1, 2);
    let hand_checked = conditional_moment(2, 2, 2, Parity::Even).unwrap() == even_direct
        && moment_finite(2, 2, 2).unwrap() == r(5, 1);
    let (p, n, e, u) = &counterexamples[0];
    let ok = bad.is_empty() && counterexamples.len() == 18 && hand_checked;
    outcome(
        ok,
        format!(
            "{equalities} equalities (m < n), {} counterexamples at m = n (e.g. p={p} n={n}: {e} vs {u}), {} failures",
            counterexamples.len(),
            bad.len()
        ),
    )
}

fn mixture() -> Outcome {
    let start = Instant::now();
    let residuals: Vec<f64> = [2, 3, 5, 7]
        .iter()
        .map(|&p| mixture_residual(p, 30, 60).unwrap())
        .collect();
    let elapsed = start.elapsed();
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    outcome(
        worst < 1e-12 && elapsed < Duration::from_secs(5),
        format!(
            "max residual {worst:e} over p in {{2,3,5,7}}, {}",
            secs(elapsed)
        ),
    )
}

fn dense(h: &Histogram) -> Vec<u64> {
    (0..=h.max_dim()).map(|d| h.count(d)).collect()
}

fn quarter() -> Outcome {
    let mut report = Vec::new();
    let mut ok = true;
    for n in 1..=3usize {
        let qb = make_quarter_block(n).unwrap();
        let dim = qb.dim();
        let wq = Subspace::span(2, dim, (1..=n).map(|i| FpVec::unit(2, dim, i))).unwrap();
        assert!(qb.is_maximal_isotropic(&wq).unwrap());
        let hq = dense(&intersection_histogram_in(&enumerate_mis(&qb).unwrap(), &wq).unwrap());
        let h = make_hyperbolic(2, n - 1).unwrap();
        let wh = Subspace::span(
            2,
            2 * n - 2,
            (0..n - 1).map(|i| FpVec::unit(2, 2 * n - 2, i)),
        )
        .unwrap();
        let mut shifted = vec![0];
        shifted.extend(dense(
            &intersection_histogram_in(&enumerate_mis(&h).unwrap(), &wh).unwrap(),
        ));
        ok &= hq == shifted;
        report.push(format!("n={n}: {hq:?} vs {shifted:?}"));
    }
    outcome(ok, report.join("; "))
}

fn sampler_fidelity() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (p, n) in [(2u64, 2usize), (3, 2)] {
        let space = make_hyperbolic(p, n).unwrap();
        let all = enumerate_mis(&space).unwrap();
        let plan = TrialPlan::new(101 + p, 100_000);
        let counts = plan.histogram(|rng| {
            all.index_of(&sample_mis_uniform(&space, rng).unwrap())
                .unwrap()
        });
        let uniform = vec![1.0 / all.len() as f64; all.len()];
        let chi = chi_square_gof(&counts, &uniform);
        ok &= chi.p_value > 0.001;
        parts.push(format!("mis({p},{n}) chi2 p-value {:.4}", chi.p_value));
    }
    for n in [2usize, 6] {
        let trials = 1_000_000u64;
        let sampler = BernoulliSum::new(2, n).unwrap();
        let counts = TrialPlan::new(202 + n as u64, trials).histogram(|rng| sampler.sample(rng));
        let law = dist_a_dn(2, n as u32).unwrap().probs_float;
        let worst = law
            .iter()
            .enumerate()
            .map(|(d, &q)| {
                let hits = counts.get(d).copied().unwrap_or(0);
                let sigma = binomial_sigma(q, trials);
                (hits as f64 / trials as f64 - q).abs() / sigma
            })
            .fold(0.0, f64::max);
        ok &= worst <= 3.0 && counts.len() <= law.len();
        parts.push(format!("xn(2,{n}) max |z| {worst:.2}"));
    }
    outcome(ok, parts.join("; "))
}

fn limit_behavior() -> Outcome {
    let tower = build_tower(2, 20).unwrap();
    let plan = TrialPlan::new(7, 1_000_000);
    let start = Instant::now();
    let est = estimate_limit_pmf(&tower, &plan).unwrap();
    let elapsed = start.elapsed();
    // oracle: f64 partial product of (1 + 2^-j)^-1
    let mut a0 = 1.0f64;
    for j in 0..80 {
        a0 /= 1.0 + 2f64.powi(-j);
    }
    let a1 = 2.0 * a0;
    let trials = est.trials;
    let z0 = (est.empirical(0) - a0) / binomial_sigma(a0, trials);
    let z1 = (est.empirical(1) - a1) / binomial_sigma(a1, trials);
    let worst_level = est
        .level_changes
        .iter()
        .map(|c| {
            let expected = 1.0 / (2f64.powi(c.level as i32 - 1) + 1.0);
            ((c.fraction - expected) / binomial_sigma(expected, trials)).abs()
        })
        .fold(0.0, f64::max);
    let worst_at = est
        .level_changes
        .iter()
        .max_by(|a, b| a.z.abs().total_cmp(&b.z.abs()))
        .map(|c| c.level)
        .unwrap_or(0);
    let ok = z0.abs() <= 3.0
        && z1.abs() <= 3.0
        && worst_level <= 3.0
        && elapsed < Duration::from_secs(600);
    outcome(
        ok,
        format!(
            "P(d=0) {:.5} (z {z0:.2}), P(d=1) {:.5} (z {z1:.2}), max level |z| {worst_level:.2} at level {worst_at}, \
             max |corr| {:.5} (bound {:.5}), E(2^d) {:.4}, {} single worker; speedup not measurable on {} cpu(s)",
            est.empirical(0),
            est.empirical(1),
            est.max_abs_correlation,
            est.correlation_bound,
            est.mean_p_pow_d,
            secs(elapsed),
            std::thread::available_parallelism().map_or(1, |n| n.get()),
        ),
    )
}

fn reproducibility() -> Outcome {
    let tower = build_tower(2, 12).unwrap();
    let sel = xsel_sampler(3, 1e-9).unwrap();
    let summary = |workers: usize| {
        let tower_plan = TrialPlan::new(99, 60_000).with_workers(workers);
        let est = serde_json::to_string(&estimate_limit_pmf(&tower, &tower_plan).unwrap()).unwrap();
        let sel_plan = TrialPlan::new(99, 300_000).with_workers(workers);
        let hist = sel_plan.histogram(|rng| sel.sample(rng));
        format!("{est}|{hist:?}")
    };
    let first = summary(1);
    let again = summary(1);
    let parallel = summary(8);
    outcome(
        first == again && first == parallel,
        format!(
            "repeat run identical: {}, workers 1 vs 8 identical: {}",
            first == again,
            first == parallel
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("counting", counting),
        ("fibers", fibers),
        ("exact pmf", exact_pmf),
        ("parity", parity),
        ("moments", moments),
        ("conditional moments", conditional_moments),
        ("mixture identity", mixture),
        ("quarter shift", quarter),
        ("sampler fidelity", sampler_fidelity),
        ("limit behavior", limit_behavior),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        failed += !result.pass as usize;
        println!(
            "criterion {:>2} {name}: {} ({})",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
