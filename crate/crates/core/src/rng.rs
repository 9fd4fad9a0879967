//! Reproducible random streams and exact Bernoulli draws.
//!
//! The generator is ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`), a
//! counter-based generator: the 64-bit seed selects the key and
//! `stream_id` selects an independent stream under that key. Output is
//! value-stable across platforms.

use num_bigint::BigUint;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `[0, n)`, unbiased by rejection.
    pub fn uniform_below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % n;
            }
        }
    }

    /// Uniform integer in `[0, n)` for arbitrarily large `n`.
    pub fn uniform_below_big(&mut self, n: &BigUint) -> BigUint {
        assert!(n.bits() > 0);
        let bits = n.bits();
        let words = bits.div_ceil(64) as usize;
        let top = bits % 64;
        loop {
            let mut digits: Vec<u64> = (0..words).map(|_| self.next_u64()).collect();
            if top != 0 {
                digits[words - 1] &= (1u64 << top) - 1;
            }
            let x = BigUint::from_slice(
                &digits
                    .iter()
                    .flat_map(|d| [*d as u32, (*d >> 32) as u32])
                    .collect::<Vec<_>>(),
            );
            if &x < n {
                return x;
            }
        }
    }
}

/// A Bernoulli variable with success probability exactly `1 / den`.
#[derive(Clone, Debug)]
pub enum RecipBernoulli {
    /// `den <= 2^64`: success iff a 64-bit draw falls below `threshold = floor(2^64 / den)`,
    /// rejecting draws at or above `threshold * den`.
    Word {
        threshold: u128,
        zone: u128,
    },
    Big(BigUint),
}

impl RecipBernoulli {
    pub fn new(den: &BigUint) -> Self {
        assert!(den.bits() > 0, "denominator must be positive");
        match u128::try_from(den) {
            Ok(d) if d <= 1u128 << 64 => {
                let threshold = (1u128 << 64) / d;
                RecipBernoulli::Word {
                    threshold,
                    zone: threshold * d,
                }
            }
            _ => RecipBernoulli::Big(den.clone()),
        }
    }

    #[inline]
    pub fn sample(&self, rng: &mut RngStream) -> bool {
        match self {
            RecipBernoulli::Word { threshold, zone } => loop {
                let x = rng.next_u64() as u128;
                if x < *zone {
                    return x < *threshold;
                }
            },
            RecipBernoulli::Big(den) => rng.uniform_below_big(den).bits() == 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = {
            let mut r = RngStream::new(7, 3);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = RngStream::new(7, 3);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut r = RngStream::new(7, 4);
            (0..8).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn recip_bernoulli_rates() {
        let mut rng = RngStream::new(1, 0);
        for den in [1u64, 2, 3, 17] {
            let b = RecipBernoulli::new(&BigUint::from(den));
            let n = 200_000;
            let hits = (0..n).filter(|_| b.sample(&mut rng)).count() as f64;
            let p = 1.0 / den as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (hits / n as f64 - p).abs() <= 4.0 * sigma + 1e-12,
                "den={den}"
            );
        }
        let huge = BigUint::from(3u32).pow(100);
        let b = RecipBernoulli::new(&huge);
        assert!(matches!(b, RecipBernoulli::Big(_)));
        assert!((0..1000).all(|_| !b.sample(&mut rng)));
    }

    #[test]
    fn uniform_below_big_range() {
        let mut rng = RngStream::new(2, 0);
        let n = BigUint::from(5u32);
        let mut seen = [0usize; 5];
        for _ in 0..5000 {
            let x = rng.uniform_below_big(&n);
            seen[u32::try_from(&x).unwrap() as usize] += 1;
        }
        assert!(seen.iter().all(|&c| c > 800));
        for _ in 0..1000 {
            assert!(rng.uniform_below(3) < 3);
        }
    }
}
