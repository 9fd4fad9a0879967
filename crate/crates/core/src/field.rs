//! Arithmetic in F_p and row vectors over F_p.
//!
//! Vectors over F_2 are bit-packed into `u64` words; vectors over odd
//! primes store one byte per coordinate. Both representations derive a
//! total order so that canonical subspaces can be sorted and hashed.

use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn check_prime(p: u64) -> Result<u64> {
    if is_prime(p) {
        Ok(p)
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Validates a prime usable for vector arithmetic (coordinates stored in a byte).
pub fn check_small_prime(p: u64) -> Result<u8> {
    check_prime(p)?;
    u8::try_from(p).map_err(|_| Error::UnsupportedPrime(p))
}

/// Multiplicative inverse of a nonzero element of F_p.
pub fn inv_mod(a: u8, p: u8) -> u8 {
    debug_assert!(!a.is_multiple_of(p));
    // a^(p-2) by square-and-multiply
    let (mut base, mut exp, mut acc) = (a as u32 % p as u32, p as u32 - 2, 1u32);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p as u32;
        }
        base = base * base % p as u32;
        exp >>= 1;
    }
    acc as u8
}

#[inline]
pub fn mul_mod(a: u8, b: u8, p: u8) -> u8 {
    ((a as u16 * b as u16) % p as u16) as u8
}

#[inline]
pub fn neg_mod(a: u8, p: u8) -> u8 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Repr {
    Bits(Vec<u64>),
    Bytes { p: u8, coords: Vec<u8> },
}

/// A row vector over F_p.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpVec {
    len: usize,
    repr: Repr,
}

impl FpVec {
    pub fn zeros(p: u8, len: usize) -> Self {
        let repr = if p == 2 {
            Repr::Bits(vec![0; len.div_ceil(64)])
        } else {
            Repr::Bytes {
                p,
                coords: vec![0; len],
            }
        };
        FpVec { len, repr }
    }

    pub fn unit(p: u8, len: usize, i: usize) -> Self {
        let mut v = Self::zeros(p, len);
        v.set(i, 1);
        v
    }

    /// Builds a vector from integer coordinates, reducing each mod p.
    pub fn from_coords(p: u8, coords: &[i64]) -> Self {
        let mut v = Self::zeros(p, coords.len());
        for (i, &c) in coords.iter().enumerate() {
            v.set(i, c.rem_euclid(p as i64) as u8);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn prime(&self) -> u8 {
        match &self.repr {
            Repr::Bits(_) => 2,
            Repr::Bytes { p, .. } => *p,
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        debug_assert!(i < self.len);
        match &self.repr {
            Repr::Bits(w) => ((w[i / 64] >> (i % 64)) & 1) as u8,
            Repr::Bytes { coords, .. } => coords[i],
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, a: u8) {
        debug_assert!(i < self.len);
        match &mut self.repr {
            Repr::Bits(w) => {
                let mask = 1u64 << (i % 64);
                if a & 1 == 1 {
                    w[i / 64] |= mask;
                } else {
                    w[i / 64] &= !mask;
                }
            }
            Repr::Bytes { p, coords } => coords[i] = a % *p,
        }
    }

    pub fn coords(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Bits(w) => w.iter().all(|&x| x == 0),
            Repr::Bytes { coords, .. } => coords.iter().all(|&x| x == 0),
        }
    }

    /// Index of the first nonzero coordinate.
    pub fn leading(&self) -> Option<usize> {
        match &self.repr {
            Repr::Bits(w) => w
                .iter()
                .enumerate()
                .find(|(_, &x)| x != 0)
                .map(|(k, x)| k * 64 + x.trailing_zeros() as usize),
            Repr::Bytes { coords, .. } => coords.iter().position(|&x| x != 0),
        }
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, other: &FpVec, a: u8) {
        debug_assert_eq!(self.len, other.len);
        match (&mut self.repr, &other.repr) {
            (Repr::Bits(x), Repr::Bits(y)) => {
                if a & 1 == 1 {
                    for (u, v) in x.iter_mut().zip(y) {
                        *u ^= v;
                    }
                }
            }
            (Repr::Bytes { p, coords: x }, Repr::Bytes { coords: y, .. }) => {
                let p = *p as u16;
                let a = a as u16 % p;
                if a == 0 {
                    return;
                }
                for (u, &v) in x.iter_mut().zip(y) {
                    *u = ((*u as u16 + a * v as u16) % p) as u8;
                }
            }
            _ => panic!("mixed vector representations"),
        }
    }

    pub fn add(&mut self, other: &FpVec) {
        self.add_scaled(other, 1);
    }

    pub fn scale(&mut self, a: u8) {
        match &mut self.repr {
            Repr::Bits(w) => {
                if a & 1 == 0 {
                    w.iter_mut().for_each(|x| *x = 0);
                }
            }
            Repr::Bytes { p, coords } => {
                for c in coords.iter_mut() {
                    *c = mul_mod(*c, a, *p);
                }
            }
        }
    }

    pub fn scaled(&self, a: u8) -> FpVec {
        let mut v = self.clone();
        v.scale(a);
        v
    }

    pub fn neg(&self) -> FpVec {
        let p = self.prime();
        self.scaled(p - 1)
    }

    /// Standard dot product over F_p.
    pub fn dot(&self, other: &FpVec) -> u8 {
        debug_assert_eq!(self.len, other.len);
        match (&self.repr, &other.repr) {
            (Repr::Bits(x), Repr::Bits(y)) => {
                let ones: u32 = x.iter().zip(y).map(|(a, b)| (a & b).count_ones()).sum();
                (ones & 1) as u8
            }
            (Repr::Bytes { p, coords: x }, Repr::Bytes { coords: y, .. }) => {
                let s: u64 = x.iter().zip(y).map(|(&a, &b)| a as u64 * b as u64).sum();
                (s % *p as u64) as u8
            }
            _ => panic!("mixed vector representations"),
        }
    }

    /// Coordinates `range` as a new vector.
    pub fn slice(&self, start: usize, end: usize) -> FpVec {
        debug_assert!(start <= end && end <= self.len);
        let mut out = FpVec::zeros(self.prime(), end - start);
        match (&self.repr, &mut out.repr) {
            (Repr::Bits(src), Repr::Bits(dst)) => {
                let (word, shift) = (start / 64, start % 64);
                for (k, d) in dst.iter_mut().enumerate() {
                    let lo = src.get(word + k).copied().unwrap_or(0) >> shift;
                    let hi = if shift == 0 {
                        0
                    } else {
                        src.get(word + k + 1).copied().unwrap_or(0) << (64 - shift)
                    };
                    *d = lo | hi;
                }
                let rem = (end - start) % 64;
                if rem != 0 {
                    if let Some(last) = dst.last_mut() {
                        *last &= (1u64 << rem) - 1;
                    }
                }
            }
            (Repr::Bytes { coords: src, .. }, Repr::Bytes { coords: dst, .. }) => {
                dst.copy_from_slice(&src[start..end]);
            }
            _ => unreachable!(),
        }
        out
    }

    /// Concatenation `self || other`.
    pub fn concat(&self, other: &FpVec) -> FpVec {
        let mut out = FpVec::zeros(self.prime(), self.len + other.len);
        for i in 0..self.len {
            out.set(i, self.get(i));
        }
        for i in 0..other.len {
            out.set(self.len + i, other.get(i));
        }
        out
    }

    /// Enumerates every vector of F_p^len in lexicographic order of coordinates.
    pub fn all(p: u8, len: usize) -> impl Iterator<Item = FpVec> {
        let total = (p as u64)
            .checked_pow(len as u32)
            .expect("vector space too large");
        (0..total).map(move |mut idx| {
            let mut v = FpVec::zeros(p, len);
            for i in (0..len).rev() {
                v.set(i, (idx % p as u64) as u8);
                idx /= p as u64;
            }
            v
        })
    }
}

impl std::fmt::Display for FpVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for i in 0..self.len {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", self.get(i))?;
        }
        write!(f, ")")
    }
}
