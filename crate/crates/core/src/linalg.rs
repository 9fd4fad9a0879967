//! Gaussian elimination over F_p and canonical subspaces.

use crate::error::{Error, Result};
use crate::field::{inv_mod, neg_mod, FpVec};

/// Reduced row-echelon form, pivots chosen only among the first `limit` columns.
/// Returns the nonzero rows and their pivot columns.
fn rref_limited(mut rows: Vec<FpVec>, limit: usize) -> (Vec<FpVec>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..limit {
        let Some(k) = (r..rows.len()).find(|&k| rows[k].get(col) != 0) else {
            continue;
        };
        rows.swap(r, k);
        let p = rows[r].prime();
        let lead = rows[r].get(col);
        if lead != 1 {
            rows[r].scale(inv_mod(lead, p));
        }
        let pivot_row = rows[r].clone();
        for (k, row) in rows.iter_mut().enumerate() {
            if k != r {
                let a = row.get(col);
                if a != 0 {
                    row.add_scaled(&pivot_row, neg_mod(a, p));
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn rref(rows: Vec<FpVec>) -> Vec<FpVec> {
    let limit = rows.first().map_or(0, FpVec::len);
    rref_limited(rows, limit).0
}

/// Rank by forward elimination only.
pub fn rank(mut rows: Vec<FpVec>) -> usize {
    let mut r = 0;
    let Some(len) = rows.first().map(FpVec::len) else {
        return 0;
    };
    for col in 0..len {
        let Some(k) = (r..rows.len()).find(|&k| rows[k].get(col) != 0) else {
            continue;
        };
        rows.swap(r, k);
        let p = rows[r].prime();
        let inv = inv_mod(rows[r].get(col), p);
        let (head, tail) = rows.split_at_mut(r + 1);
        for row in tail.iter_mut() {
            let a = row.get(col);
            if a != 0 {
                row.add_scaled(&head[r], neg_mod(crate::field::mul_mod(a, inv, p), p));
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Basis of `{v : row . v = 0 for every row}` in F_p^len.
pub fn kernel(rows: Vec<FpVec>, p: u8, len: usize) -> Vec<FpVec> {
    let (rows, pivots) = rref_limited(rows, len);
    let mut is_pivot = vec![false; len];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    (0..len)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = FpVec::unit(p, len, free);
            for (row, &pc) in rows.iter().zip(&pivots) {
                v.set(pc, neg_mod(row.get(free), p));
            }
            v
        })
        .collect()
}

/// Solves `rows[i] . x = rhs[i]` for all i; returns one solution if consistent.
pub fn solve(rows: &[FpVec], rhs: &[u8], p: u8, len: usize) -> Option<FpVec> {
    assert_eq!(rows.len(), rhs.len());
    let aug: Vec<FpVec> = rows
        .iter()
        .zip(rhs)
        .map(|(r, &b)| r.concat(&FpVec::from_coords(p, &[b as i64])))
        .collect();
    let (red, pivots) = rref_limited(aug, len + 1);
    // inconsistent iff some row reduces to (0 | nonzero)
    if pivots.last() == Some(&len) {
        return None;
    }
    let mut x = FpVec::zeros(p, len);
    for (row, &pc) in red.iter().zip(&pivots) {
        x.set(pc, row.get(len));
    }
    Some(x)
}

/// Expresses vectors in the span of a fixed independent family by their coordinates.
#[derive(Clone, Debug)]
pub struct Coordinates {
    len: usize,
    reduced: Vec<FpVec>,
    pivots: Vec<usize>,
    transform: Vec<FpVec>,
}

impl Coordinates {
    pub fn new(basis: &[FpVec], p: u8, len: usize) -> Result<Self> {
        let k = basis.len();
        let aug: Vec<FpVec> = basis
            .iter()
            .enumerate()
            .map(|(i, b)| b.concat(&FpVec::unit(p, k, i)))
            .collect();
        let (red, pivots) = rref_limited(aug, len);
        if red.len() != k || pivots.len() != k {
            return Err(Error::InvalidArgument(
                "basis is not linearly independent".into(),
            ));
        }
        let reduced = red.iter().map(|r| r.slice(0, len)).collect();
        let transform = red.iter().map(|r| r.slice(len, len + k)).collect();
        Ok(Coordinates {
            len,
            reduced,
            pivots,
            transform,
        })
    }

    /// Coordinates of `u` in the basis, or `None` if `u` is outside the span.
    pub fn coords(&self, u: &FpVec) -> Option<FpVec> {
        let p = u.prime();
        let mut residual = u.clone();
        let mut out = FpVec::zeros(p, self.transform.len());
        for ((row, t), &pc) in self.reduced.iter().zip(&self.transform).zip(&self.pivots) {
            let a = residual.get(pc);
            if a != 0 {
                residual.add_scaled(row, neg_mod(a, p));
                out.add_scaled(t, a);
            }
        }
        debug_assert_eq!(residual.len(), self.len);
        residual.is_zero().then_some(out)
    }
}

/// A subspace of F_p^n stored in reduced row-echelon form.
///
/// Two equal subspaces have identical representations, so `Eq`, `Hash`
/// and `Ord` compare subspaces themselves.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    p: u8,
    ambient_dim: usize,
    basis: Vec<FpVec>,
}

impl Subspace {
    pub fn zero(p: u8, ambient_dim: usize) -> Self {
        Subspace {
            p,
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn whole(p: u8, ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| FpVec::unit(p, ambient_dim, i))
            .collect();
        Subspace {
            p,
            ambient_dim,
            basis,
        }
    }

    pub fn span(
        p: u8,
        ambient_dim: usize,
        vectors: impl IntoIterator<Item = FpVec>,
    ) -> Result<Self> {
        let rows: Vec<FpVec> = vectors.into_iter().collect();
        for v in &rows {
            if v.len() != ambient_dim {
                return Err(Error::LengthMismatch {
                    expected: ambient_dim,
                    got: v.len(),
                });
            }
            if v.prime() != p {
                return Err(Error::InvalidArgument(
                    "vector over a different field".into(),
                ));
            }
        }
        Ok(Self::from_rows_unchecked(p, ambient_dim, rows))
    }

    pub(crate) fn from_rows_unchecked(p: u8, ambient_dim: usize, rows: Vec<FpVec>) -> Self {
        let basis = if rows.is_empty() { rows } else { rref(rows) };
        Subspace {
            p,
            ambient_dim,
            basis,
        }
    }

    /// Span of vectors given by integer coordinates.
    pub fn from_coords(p: u8, ambient_dim: usize, rows: &[&[i64]]) -> Result<Self> {
        Self::span(
            p,
            ambient_dim,
            rows.iter().map(|r| FpVec::from_coords(p, r)),
        )
    }

    pub fn prime(&self) -> u8 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[FpVec] {
        &self.basis
    }

    pub fn contains(&self, v: &FpVec) -> bool {
        let mut r = v.clone();
        for row in &self.basis {
            let pc = row.leading().expect("rref rows are nonzero");
            let a = r.get(pc);
            if a != 0 {
                r.add_scaled(row, neg_mod(a, self.p));
            }
        }
        r.is_zero()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let rows = self.basis.iter().chain(&other.basis).cloned().collect();
        Self::from_rows_unchecked(self.p, self.ambient_dim, rows)
    }

    pub fn with_vector(&self, v: &FpVec) -> Subspace {
        let mut rows = self.basis.clone();
        rows.push(v.clone());
        Self::from_rows_unchecked(self.p, self.ambient_dim, rows)
    }

    /// Annihilator under the standard dot product.
    pub fn annihilator(&self) -> Subspace {
        let k = kernel(self.basis.clone(), self.p, self.ambient_dim);
        Self::from_rows_unchecked(self.p, self.ambient_dim, k)
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        self.annihilator().sum(&other.annihilator()).annihilator()
    }

    /// `dim(self ∩ other)` without forming the intersection.
    pub fn intersection_dim(&self, other: &Subspace) -> usize {
        let rows: Vec<FpVec> = self.basis.iter().chain(&other.basis).cloned().collect();
        self.dim() + other.dim() - rank(rows)
    }

    /// Extends `self` to a basis of `larger` (which must contain it); returns the added vectors.
    pub fn complement_in(&self, larger: &Subspace) -> Vec<FpVec> {
        let mut current = self.clone();
        let mut added = Vec::new();
        for v in &larger.basis {
            if !current.contains(v) {
                current = current.with_vector(v);
                added.push(v.clone());
            }
        }
        added
    }

    /// Every element of the subspace, `p^dim` of them.
    pub fn elements(&self) -> impl Iterator<Item = FpVec> + '_ {
        FpVec::all(self.p, self.dim()).map(move |c| {
            let mut v = FpVec::zeros(self.p, self.ambient_dim);
            for (i, row) in self.basis.iter().enumerate() {
                v.add_scaled(row, c.get(i));
            }
            v
        })
    }

    /// One representative per line (first nonzero coordinate 1) of the subspace.
    pub fn projective_points(&self) -> impl Iterator<Item = FpVec> + '_ {
        let k = self.dim();
        FpVec::all(self.p, k)
            .filter(|c| c.leading().is_some_and(|i| c.get(i) == 1))
            .map(move |c| {
                let mut v = FpVec::zeros(self.p, self.ambient_dim);
                for (i, row) in self.basis.iter().enumerate() {
                    v.add_scaled(row, c.get(i));
                }
                v
            })
    }
}

impl std::fmt::Display for Subspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "span[")?;
        for (i, v) in self.basis.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_is_unique() {
        let a = Subspace::from_coords(3, 3, &[&[1, 1, 0], &[0, 1, 1]]).unwrap();
        let b = Subspace::from_coords(3, 3, &[&[1, 2, 1], &[2, 1, 2], &[1, 1, 0]]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dim(), 2);
        for row in a.basis() {
            assert!(!row.is_zero());
        }
    }

    #[test]
    fn kernel_and_intersection() {
        let u = Subspace::from_coords(2, 4, &[&[1, 0, 0, 0], &[0, 1, 0, 0]]).unwrap();
        let v = Subspace::from_coords(2, 4, &[&[0, 1, 0, 0], &[0, 0, 1, 0]]).unwrap();
        let i = u.intersection(&v);
        assert_eq!(i, Subspace::from_coords(2, 4, &[&[0, 1, 0, 0]]).unwrap());
        assert_eq!(u.intersection_dim(&v), 1);
        assert_eq!(u.annihilator().dim(), 2);
        assert_eq!(Subspace::zero(2, 4).annihilator(), Subspace::whole(2, 4));
    }

    #[test]
    fn solve_and_coordinates() {
        let rows = vec![
            FpVec::from_coords(5, &[1, 2]),
            FpVec::from_coords(5, &[3, 4]),
        ];
        let x = solve(&rows, &[1, 2], 5, 2).unwrap();
        assert_eq!(rows[0].dot(&x), 1);
        assert_eq!(rows[1].dot(&x), 2);
        let sing = vec![
            FpVec::from_coords(5, &[1, 2]),
            FpVec::from_coords(5, &[2, 4]),
        ];
        assert!(solve(&sing, &[1, 1], 5, 2).is_none());

        let basis = vec![
            FpVec::from_coords(3, &[1, 1, 0]),
            FpVec::from_coords(3, &[0, 1, 1]),
        ];
        let c = Coordinates::new(&basis, 3, 3).unwrap();
        let mut u = basis[0].scaled(2);
        u.add(&basis[1]);
        assert_eq!(c.coords(&u).unwrap().coords(), vec![2, 1]);
        assert!(c.coords(&FpVec::from_coords(3, &[1, 0, 0])).is_none());
    }

    #[test]
    fn element_counts() {
        let s = Subspace::from_coords(3, 4, &[&[1, 0, 1, 0], &[0, 1, 0, 2]]).unwrap();
        assert_eq!(s.elements().count(), 9);
        assert_eq!(s.projective_points().count(), 4);
        assert!(s.elements().all(|v| s.contains(&v)));
    }
}
