//! Finite quadratic spaces over F_p.
//!
//! A form takes values in `(1/p)Z/Z`, or in `(1/4)Z/Z` for quarter-valued
//! forms on F_2-spaces. Values are stored as numerators over the modulus
//! `p * scale` (see [`TValue`]).

use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::field::{check_small_prime, inv_mod, mul_mod, neg_mod, FpVec};
use crate::linalg::{kernel, rank, solve, Coordinates, Subspace};

/// An element of `Z/(p*s)`, read as the fraction `numerator / modulus` in Q/Z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TValue {
    numerator: u32,
    modulus: u32,
}

impl TValue {
    pub fn new(numerator: i64, modulus: u32) -> Self {
        assert!(modulus > 0);
        TValue {
            numerator: numerator.rem_euclid(modulus as i64) as u32,
            modulus,
        }
    }

    pub fn zero(modulus: u32) -> Self {
        Self::new(0, modulus)
    }

    pub fn numerator(self) -> u32 {
        self.numerator
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.numerator == 0
    }

    /// Integer multiple `k * self`.
    pub fn times(self, k: i64) -> Self {
        let m = self.modulus as i64;
        Self::new((k.rem_euclid(m) * self.numerator as i64) % m, self.modulus)
    }

    /// The value as a reduced fraction `(a, b)` with `0 <= a < b`.
    pub fn as_fraction(self) -> (u32, u32) {
        let g = num_integer::gcd(self.numerator, self.modulus);
        (self.numerator / g, self.modulus / g)
    }
}

impl Add for TValue {
    type Output = TValue;
    fn add(self, rhs: TValue) -> TValue {
        assert_eq!(self.modulus, rhs.modulus);
        TValue::new(self.numerator as i64 + rhs.numerator as i64, self.modulus)
    }
}

impl Sub for TValue {
    type Output = TValue;
    fn sub(self, rhs: TValue) -> TValue {
        assert_eq!(self.modulus, rhs.modulus);
        TValue::new(self.numerator as i64 - rhs.numerator as i64, self.modulus)
    }
}

impl Neg for TValue {
    type Output = TValue;
    fn neg(self) -> TValue {
        TValue::new(-(self.numerator as i64), self.modulus)
    }
}

impl fmt::Display for TValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_fraction() {
            (0, _) => write!(f, "0"),
            (a, b) => write!(f, "{a}/{b}"),
        }
    }
}

/// A quadratic form on F_p^dim, given by `Q(e_i)` and the pairing matrix `<e_i, e_j>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticSpace {
    p: u8,
    scale: u8,
    q: Vec<u32>,
    pairing: Vec<Vec<u32>>,
    // pairing / scale over F_p, sparse by row
    rows: Vec<Vec<(usize, u8)>>,
    // nonzero pairing numerators above the diagonal
    upper: Vec<(usize, usize, u32)>,
    nondegenerate: bool,
}

impl QuadraticSpace {
    /// Builds a space from basis values `q[i]` and pairing numerators, both modulo `p * scale`.
    pub fn new(p: u64, scale: u8, q: Vec<u32>, pairing: Vec<Vec<u32>>) -> Result<Self> {
        let p = check_small_prime(p)?;
        if scale != 1 && scale != 2 {
            return Err(Error::InvalidSpace(format!(
                "scale must be 1 or 2, got {scale}"
            )));
        }
        if scale == 2 && p != 2 {
            return Err(Error::InvalidSpace("scale 2 requires p = 2".into()));
        }
        let dim = q.len();
        let m = p as u32 * scale as u32;
        if pairing.len() != dim || pairing.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidSpace(
                "pairing matrix must be dim x dim".into(),
            ));
        }
        if q.iter().chain(pairing.iter().flatten()).any(|&x| x >= m) {
            return Err(Error::InvalidSpace(format!("values must lie in [0, {m})")));
        }
        for i in 0..dim {
            if pairing[i][i] != 2 * q[i] % m {
                return Err(Error::InvalidSpace(format!(
                    "diagonal entry {i} is not 2 Q(e_{i})"
                )));
            }
            for j in 0..dim {
                if pairing[i][j] != pairing[j][i] {
                    return Err(Error::InvalidSpace(
                        "pairing matrix is not symmetric".into(),
                    ));
                }
                if scale == 2 && !pairing[i][j].is_multiple_of(2) {
                    return Err(Error::InvalidSpace(
                        "quarter-valued forms need a pairing valued in (1/2)Z/Z".into(),
                    ));
                }
            }
        }
        let s = scale as u32;
        let rows: Vec<Vec<(usize, u8)>> = pairing
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0)
                    .map(|(j, &x)| (j, (x / s) as u8))
                    .collect()
            })
            .collect();
        let upper = (0..dim)
            .flat_map(|i| (i + 1..dim).map(move |j| (i, j)))
            .filter(|&(i, j)| pairing[i][j] != 0)
            .map(|(i, j)| (i, j, pairing[i][j]))
            .collect();
        let mut space = QuadraticSpace {
            p,
            scale,
            q,
            pairing,
            rows,
            upper,
            nondegenerate: false,
        };
        let matrix: Vec<FpVec> = (0..dim).map(|i| space.pairing_row(i)).collect();
        space.nondegenerate = rank(matrix) == dim;
        Ok(space)
    }

    pub fn prime(&self) -> u8 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn scale(&self) -> u8 {
        self.scale
    }

    pub fn modulus(&self) -> u32 {
        self.p as u32 * self.scale as u32
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.nondegenerate
    }

    pub fn q_basis(&self) -> Vec<TValue> {
        self.q
            .iter()
            .map(|&x| TValue::new(x as i64, self.modulus()))
            .collect()
    }

    pub fn pairing_matrix(&self) -> Vec<Vec<TValue>> {
        self.pairing
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&x| TValue::new(x as i64, self.modulus()))
                    .collect()
            })
            .collect()
    }

    /// Row `i` of the pairing divided by the scale, as a vector over F_p.
    fn pairing_row(&self, i: usize) -> FpVec {
        let mut v = FpVec::zeros(self.p, self.dim());
        for &(j, a) in &self.rows[i] {
            v.set(j, a);
        }
        v
    }

    pub fn vector(&self, coords: &[i64]) -> Result<FpVec> {
        self.check_len(coords.len())?;
        Ok(FpVec::from_coords(self.p, coords))
    }

    pub fn subspace(&self, rows: &[&[i64]]) -> Result<Subspace> {
        Subspace::from_coords(self.p, self.dim(), rows)
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    fn check_subspace(&self, s: &Subspace) -> Result<()> {
        self.check_len(s.ambient_dim())?;
        if s.prime() != self.p {
            return Err(Error::InvalidArgument(
                "subspace over a different field".into(),
            ));
        }
        Ok(())
    }

    /// `Q(v)` via `sum c_i^2 Q(e_i) + sum_{i<j} c_i c_j <e_i, e_j>` with coefficients lifted to `[0, p)`.
    pub fn eval_q(&self, v: &FpVec) -> Result<TValue> {
        self.check_len(v.len())?;
        Ok(self.eval_q_unchecked(v))
    }

    pub(crate) fn eval_q_unchecked(&self, v: &FpVec) -> TValue {
        let m = self.modulus() as u64;
        let mut acc = 0u64;
        for (i, &qi) in self.q.iter().enumerate() {
            let c = v.get(i) as u64;
            if c != 0 && qi != 0 {
                acc += c * c % m * qi as u64;
            }
        }
        for &(i, j, b) in &self.upper {
            let (ci, cj) = (v.get(i) as u64, v.get(j) as u64);
            if ci != 0 && cj != 0 {
                acc += ci * cj % m * b as u64;
            }
        }
        TValue::new((acc % m) as i64, self.modulus())
    }

    /// The linear functional `x -> <x, y> / scale`, as a vector over F_p.
    pub fn functional(&self, y: &FpVec) -> FpVec {
        let mut out = FpVec::zeros(self.p, self.dim());
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc = 0u32;
            for &(j, a) in row {
                acc += mul_mod(a, y.get(j), self.p) as u32;
            }
            out.set(i, (acc % self.p as u32) as u8);
        }
        out
    }

    pub fn pairing(&self, x: &FpVec, y: &FpVec) -> Result<TValue> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        Ok(self.pairing_unchecked(x, y))
    }

    pub(crate) fn pairing_unchecked(&self, x: &FpVec, y: &FpVec) -> TValue {
        let d = x.dot(&self.functional(y));
        TValue::new(d as i64 * self.scale as i64, self.modulus())
    }

    /// `{v : <v, w> = 0 for all w in s}`.
    pub fn perp(&self, s: &Subspace) -> Result<Subspace> {
        self.check_subspace(s)?;
        let rows = s.basis().iter().map(|b| self.functional(b)).collect();
        let k = kernel(rows, self.p, self.dim());
        Ok(Subspace::from_rows_unchecked(self.p, self.dim(), k))
    }

    /// `Q` vanishes on `s` (checked on the basis and pairwise pairings).
    pub fn is_isotropic(&self, s: &Subspace) -> Result<bool> {
        self.check_subspace(s)?;
        let b = s.basis();
        let values_vanish = b.iter().all(|v| self.eval_q_unchecked(v).is_zero());
        let pairs_vanish = (0..b.len())
            .all(|i| (i + 1..b.len()).all(|j| self.pairing_unchecked(&b[i], &b[j]).is_zero()));
        Ok(values_vanish && pairs_vanish)
    }

    /// `s^perp = s` and `Q|_s = 0`.
    pub fn is_maximal_isotropic(&self, s: &Subspace) -> Result<bool> {
        self.check_subspace(s)?;
        if 2 * s.dim() != self.dim() && self.nondegenerate {
            return Ok(false);
        }
        // s^perp = s forces the pairing to vanish on s, so Q|_s = 0 reduces to the basis values.
        Ok(self.perp(s)? == *s && s.basis().iter().all(|v| self.eval_q_unchecked(v).is_zero()))
    }

    /// Orthogonal direct sum; both spaces must share `p` and the scale.
    pub fn orthogonal_sum(&self, other: &QuadraticSpace) -> Result<QuadraticSpace> {
        if self.p != other.p || self.scale != other.scale {
            return Err(Error::InvalidArgument(
                "orthogonal sum of incompatible spaces".into(),
            ));
        }
        let (a, b) = (self.dim(), other.dim());
        let mut q = self.q.clone();
        q.extend(&other.q);
        let mut pairing = vec![vec![0; a + b]; a + b];
        for i in 0..a {
            pairing[i][..a].copy_from_slice(&self.pairing[i]);
        }
        for i in 0..b {
            pairing[a + i][a..].copy_from_slice(&other.pairing[i]);
        }
        QuadraticSpace::new(self.p as u64, self.scale, q, pairing)
    }

    /// Reinterprets a quarter-scaled space whose values all lie in `(1/2)Z/Z` as an ordinary space.
    pub fn to_half_valued(&self) -> Result<QuadraticSpace> {
        if self.scale == 1 {
            return Ok(self.clone());
        }
        if self.q.iter().any(|&x| x % 2 != 0) {
            return Err(Error::InvalidSpace("form takes quarter values".into()));
        }
        let q = self.q.iter().map(|&x| x / 2).collect();
        let pairing = self
            .pairing
            .iter()
            .map(|r| r.iter().map(|&x| x / 2).collect())
            .collect();
        QuadraticSpace::new(2, 1, q, pairing)
    }
}

/// The split space `W x W*` with `W = F_p^n`: basis `e_1..e_n, f_1..f_n`, `Q(sum a_i e_i + b_i f_i) = sum a_i b_i`.
pub fn make_hyperbolic(p: u64, n: usize) -> Result<QuadraticSpace> {
    hyperbolic_with_scale(p, n, 1)
}

fn hyperbolic_with_scale(p: u64, n: usize, scale: u8) -> Result<QuadraticSpace> {
    check_small_prime(p)?;
    let one = scale as u32; // the value 1/p in numerator units
    let mut pairing = vec![vec![0; 2 * n]; 2 * n];
    for i in 0..n {
        pairing[i][n + i] = one;
        pairing[n + i][i] = one;
    }
    QuadraticSpace::new(p, scale, vec![0; 2 * n], pairing)
}

/// A block `B` (basis u, v with `Q(u) = 1/4`, `Q(v) = 0`, `<u, v> = 1/2`) plus `n - 1` hyperbolic planes.
pub fn make_quarter_block(n: usize) -> Result<QuadraticSpace> {
    if n == 0 {
        return Err(Error::InvalidArgument("quarter block needs n >= 1".into()));
    }
    let block = QuadraticSpace::new(2, 2, vec![1, 0], vec![vec![2, 2], vec![2, 0]])?;
    block.orthogonal_sum(&hyperbolic_with_scale(2, n - 1, 2)?)
}

/// The quotient `X^perp / X` with the induced form, plus the maps to move vectors and subspaces.
#[derive(Clone, Debug)]
pub struct Subquotient {
    ambient: QuadraticSpace,
    x: Subspace,
    x_perp: Subspace,
    section: Vec<FpVec>,
    coords: Coordinates,
    space: QuadraticSpace,
}

pub fn subquotient(space: &QuadraticSpace, x: &Subspace) -> Result<Subquotient> {
    if !space.is_isotropic(x)? {
        return Err(Error::NotIsotropic);
    }
    let x_perp = space.perp(x)?;
    let section = x.complement_in(&x_perp);
    let m = space.modulus() as i64;
    let q = section
        .iter()
        .map(|c| space.eval_q_unchecked(c).numerator())
        .collect();
    let pairing = section
        .iter()
        .map(|a| {
            section
                .iter()
                .map(|b| space.pairing_unchecked(a, b).numerator() % m as u32)
                .collect()
        })
        .collect();
    let quotient = QuadraticSpace::new(space.p as u64, space.scale, q, pairing)?;
    let mut basis = section.clone();
    basis.extend(x.basis().iter().cloned());
    let coords = Coordinates::new(&basis, space.p, space.dim())?;
    Ok(Subquotient {
        ambient: space.clone(),
        x: x.clone(),
        x_perp,
        section,
        coords,
        space: quotient,
    })
}

impl Subquotient {
    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn ambient(&self) -> &QuadraticSpace {
        &self.ambient
    }

    pub fn x(&self) -> &Subspace {
        &self.x
    }

    pub fn x_perp(&self) -> &Subspace {
        &self.x_perp
    }

    /// Representatives in the ambient space of the quotient basis.
    pub fn section(&self) -> &[FpVec] {
        &self.section
    }

    /// A representative in `X^perp` of a quotient vector.
    pub fn lift(&self, v: &FpVec) -> FpVec {
        let mut out = FpVec::zeros(self.ambient.p, self.ambient.dim());
        for (i, c) in self.section.iter().enumerate() {
            out.add_scaled(c, v.get(i));
        }
        out
    }

    /// Image in `X^perp / X` of a vector of `X^perp`.
    pub fn project(&self, u: &FpVec) -> Result<FpVec> {
        let c = self
            .coords
            .coords(u)
            .ok_or_else(|| Error::InvalidArgument("vector is not in X^perp".into()))?;
        Ok(c.slice(0, self.section.len()))
    }

    /// `((W ∩ X^perp) + X) / X`.
    pub fn push(&self, w: &Subspace) -> Result<Subspace> {
        let inside = w.intersection(&self.x_perp);
        let images = inside
            .basis()
            .iter()
            .map(|u| self.project(u))
            .collect::<Result<Vec<_>>>()?;
        Ok(Subspace::from_rows_unchecked(
            self.ambient.p,
            self.space.dim(),
            images,
        ))
    }

    /// The preimage in `X^perp` of a subspace of the quotient.
    pub fn preimage(&self, s: &Subspace) -> Subspace {
        let rows = s
            .basis()
            .iter()
            .map(|v| self.lift(v))
            .chain(self.x.basis().iter().cloned())
            .collect();
        Subspace::from_rows_unchecked(self.ambient.p, self.ambient.dim(), rows)
    }
}

/// Image of a maximal isotropic `w` in `X^perp / X`, in the coordinates of [`subquotient`].
pub fn push_mis(space: &QuadraticSpace, x: &Subspace, w: &Subspace) -> Result<Subspace> {
    if !space.is_maximal_isotropic(w)? {
        return Err(Error::NotMaximalIsotropic);
    }
    subquotient(space, x)?.push(w)
}

/// Reduction of a quarter-valued space along its canonical vector `c`.
#[derive(Clone, Debug)]
pub struct QuarterReduction {
    c: FpVec,
    subquotient: Subquotient,
    reduced: QuadraticSpace,
}

impl QuarterReduction {
    /// The unique `c` with `<x, x> = <x, c>` for all `x`.
    pub fn c(&self) -> &FpVec {
        &self.c
    }

    /// `(F_2 c)^perp / F_2 c` as a half-valued (scale 1) space.
    pub fn reduced(&self) -> &QuadraticSpace {
        &self.reduced
    }

    pub fn subquotient(&self) -> &Subquotient {
        &self.subquotient
    }

    /// `W -> W / F_2 c`.
    pub fn reduce_subspace(&self, w: &Subspace) -> Result<Subspace> {
        self.subquotient.push(w)
    }

    /// Inverse of [`reduce_subspace`](Self::reduce_subspace) on maximal isotropic subspaces.
    pub fn lift_subspace(&self, w: &Subspace) -> Subspace {
        self.subquotient.preimage(w)
    }
}

pub fn quarter_reduce(space: &QuadraticSpace) -> Result<QuarterReduction> {
    if space.p != 2 || space.scale != 2 {
        return Err(Error::NoQuarterVector(
            "space is not quarter-scaled over F_2".into(),
        ));
    }
    if !space.nondegenerate {
        return Err(Error::NoQuarterVector("space is degenerate".into()));
    }
    let dim = space.dim();
    let rows: Vec<FpVec> = (0..dim).map(|i| space.pairing_row(i)).collect();
    let diag: Vec<u8> = (0..dim).map(|i| (space.pairing[i][i] / 2) as u8).collect();
    let c = solve(&rows, &diag, 2, dim)
        .ok_or_else(|| Error::NoQuarterVector("linear system is inconsistent".into()))?;
    if c.is_zero() {
        return Err(Error::NoQuarterVector("<x, x> vanishes identically".into()));
    }
    let line = Subspace::span(2, dim, [c.clone()])?;
    let sq = subquotient(space, &line).map_err(|e| match e {
        Error::NotIsotropic => {
            Error::NoQuarterVector("Q(c) != 0, so no maximal isotropic subspace exists".into())
        }
        other => other,
    })?;
    let reduced = sq.space().to_half_valued()?;
    Ok(QuarterReduction {
        c,
        subquotient: sq,
        reduced,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariantKind {
    Discriminant,
    Arf,
}

/// Order-two classification invariant; `value == 0` is the class of the hyperbolic space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormInvariant {
    pub kind: InvariantKind,
    pub value: u8,
}

impl FormInvariant {
    pub fn is_trivial(self) -> bool {
        self.value == 0
    }
}

pub fn invariant(space: &QuadraticSpace) -> Result<FormInvariant> {
    if space.scale != 1 {
        return Err(Error::InvalidSpace(
            "invariant is defined for scale-1 spaces only".into(),
        ));
    }
    if !space.nondegenerate || !space.dim().is_multiple_of(2) {
        return Err(Error::InvalidSpace(
            "invariant needs a nondegenerate even-dimensional space".into(),
        ));
    }
    if space.p == 2 {
        Ok(FormInvariant {
            kind: InvariantKind::Arf,
            value: arf(space),
        })
    } else {
        Ok(FormInvariant {
            kind: InvariantKind::Discriminant,
            value: discriminant_class(space),
        })
    }
}

/// Arf invariant from a greedy symplectic basis.
fn arf(space: &QuadraticSpace) -> u8 {
    let dim = space.dim();
    let pair = |x: &FpVec, y: &FpVec| x.dot(&space.functional(y));
    let qbit = |x: &FpVec| (space.eval_q_unchecked(x).numerator() % 2) as u8;
    let mut pool: Vec<FpVec> = (0..dim).map(|i| FpVec::unit(2, dim, i)).collect();
    let mut total = 0u8;
    while let Some(a) = pool.pop() {
        if a.is_zero() {
            continue;
        }
        let Some(k) = pool.iter().position(|b| pair(&a, b) == 1) else {
            continue;
        };
        let b = pool.swap_remove(k);
        total ^= qbit(&a) & qbit(&b);
        for x in pool.iter_mut() {
            // project x onto span(a, b)^perp
            let (xa, xb) = (pair(x, &a), pair(x, &b));
            if xb == 1 {
                x.add(&a);
            }
            if xa == 1 {
                x.add(&b);
            }
        }
    }
    total
}

/// Class of `(-1)^(dim/2) det` in `F_p^x / (F_p^x)^2`: 0 for squares.
fn discriminant_class(space: &QuadraticSpace) -> u8 {
    let p = space.p;
    let dim = space.dim();
    let mut m: Vec<FpVec> = (0..dim).map(|i| space.pairing_row(i)).collect();
    let mut det = 1u8;
    for col in 0..dim {
        let k = (col..dim)
            .find(|&k| m[k].get(col) != 0)
            .expect("nondegenerate");
        if k != col {
            m.swap(k, col);
            det = neg_mod(det, p);
        }
        let lead = m[col].get(col);
        det = mul_mod(det, lead, p);
        let inv = inv_mod(lead, p);
        let pivot = m[col].clone();
        for row in m.iter_mut().skip(col + 1) {
            let a = row.get(col);
            if a != 0 {
                row.add_scaled(&pivot, neg_mod(mul_mod(a, inv, p), p));
            }
        }
    }
    if (dim / 2) % 2 == 1 {
        det = neg_mod(det, p);
    }
    // Euler's criterion
    let mut acc = 1u32;
    for _ in 0..(p as u32 - 1) / 2 {
        acc = acc * det as u32 % p as u32;
    }
    u8::from(acc != 1)
}
