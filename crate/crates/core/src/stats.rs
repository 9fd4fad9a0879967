//! Goodness-of-fit helpers for comparing samples with exact laws.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn finish(statistic: f64, dof: usize) -> ChiSquare {
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .expect("positive degrees of freedom")
            .sf(statistic)
    };
    ChiSquare {
        statistic,
        dof,
        p_value,
    }
}

/// Pearson test of observed counts against cell probabilities.
/// Cells with zero probability must have zero counts; they are dropped.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquare {
    let n: u64 = observed.iter().sum();
    let cells = observed.len().max(probs.len());
    let mut stat = 0.0;
    let mut used = 0usize;
    for i in 0..cells {
        let o = observed.get(i).copied().unwrap_or(0) as f64;
        let p = probs.get(i).copied().unwrap_or(0.0);
        if p <= 0.0 {
            if o > 0.0 {
                return finish(f64::INFINITY, used.max(1));
            }
            continue;
        }
        let e = p * n as f64;
        stat += (o - e) * (o - e) / e;
        used += 1;
    }
    finish(stat, used.saturating_sub(1))
}

/// Two-sample homogeneity test on a shared set of cells.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquare {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let cells = a.len().max(b.len());
    let mut stat = 0.0;
    let mut used = 0usize;
    for i in 0..cells {
        let (x, y) = (
            a.get(i).copied().unwrap_or(0) as f64,
            b.get(i).copied().unwrap_or(0) as f64,
        );
        let total = x + y;
        if total == 0.0 {
            continue;
        }
        let (ea, eb) = (total * na / (na + nb), total * nb / (na + nb));
        stat += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
        used += 1;
    }
    finish(stat, used.saturating_sub(1))
}

/// Binomial standard error of an empirical frequency.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// `(observed - expected) / sigma` for a frequency of `hits` out of `n`.
pub fn z_score(hits: u64, n: u64, p: f64) -> f64 {
    let sigma = binomial_sigma(p, n);
    let diff = hits as f64 / n as f64 - p;
    if sigma == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / sigma
    }
}

/// Standard error of the mean of `values` weighted by counts.
pub fn mean_and_stderr(values: &[f64], counts: &[u64]) -> (f64, f64) {
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let mean = values
        .iter()
        .zip(counts)
        .map(|(v, &c)| v * c as f64)
        .sum::<f64>()
        / nf;
    let var = values
        .iter()
        .zip(counts)
        .map(|(v, &c)| (v - mean).powi(2) * c as f64)
        .sum::<f64>()
        / (nf - 1.0).max(1.0);
    (mean, (var / nf).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit_has_p_value_one() {
        let r = chi_square_gof(&[25, 50, 25], &[0.25, 0.5, 0.25]);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 2);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_statistic() {
        // (60-50)^2/50 + (40-50)^2/50 = 4, dof 1, sf(4) = 0.0455
        let r = chi_square_gof(&[60, 40], &[0.5, 0.5]);
        assert!((r.statistic - 4.0).abs() < 1e-12);
        assert!((r.p_value - 0.04550026).abs() < 1e-6);
        assert_eq!(
            chi_square_gof(&[1, 0], &[0.0, 1.0]).statistic,
            f64::INFINITY
        );
    }

    #[test]
    fn two_sample_identical() {
        let r = chi_square_two_sample(&[10, 20, 30], &[20, 40, 60]);
        assert!(r.statistic.abs() < 1e-12);
        assert_eq!(r.dof, 2);
    }
}
