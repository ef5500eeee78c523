//! Matrices over a sphere algebra.
//!
//! Products and sums are formed in the free algebra; [`NCMatrix::reduce`]
//! normal-orders every entry, independently and in parallel when enabled.

use std::fmt;

use thiserror::Error;

use crate::exec::Execution;
use crate::ncalgebra::{AlgebraError, AlgebraId, NCPoly, RuleSet};
use crate::qscalar::QScalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("cannot {op} a {}x{} matrix with a {}x{} matrix", .left.0, .left.1, .right.0, .right.1)]
    DimensionMismatch { op: &'static str, left: (usize, usize), right: (usize, usize) },
    #[error("matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, PartialEq, Eq)]
pub struct NCMatrix {
    rows: usize,
    cols: usize,
    algebra: AlgebraId,
    entries: Vec<NCPoly>,
}

impl NCMatrix {
    pub fn zero(algebra: AlgebraId, rows: usize, cols: usize) -> Self {
        NCMatrix { rows, cols, algebra, entries: vec![NCPoly::zero(algebra); rows * cols] }
    }

    pub fn identity(algebra: AlgebraId, n: usize) -> Self {
        Self::from_fn(algebra, n, n, |i, j| if i == j { NCPoly::one(algebra) } else { NCPoly::zero(algebra) })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> NCPoly>(algebra: AlgebraId, rows: usize, cols: usize, mut f: F) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let e = f(i, j);
                assert_eq!(e.algebra(), algebra, "entry ({i},{j}) from another algebra");
                entries.push(e);
            }
        }
        NCMatrix { rows, cols, algebra, entries }
    }

    /// Row-major entries.
    pub fn from_entries(algebra: AlgebraId, rows: usize, cols: usize, entries: Vec<NCPoly>) -> Result<Self, MatrixError> {
        if entries.len() != rows * cols {
            return Err(MatrixError::EntryCount { expected: rows * cols, found: entries.len() });
        }
        if entries.iter().any(|e| e.algebra() != algebra) {
            return Err(AlgebraError::PresentationMismatch.into());
        }
        Ok(NCMatrix { rows, cols, algebra, entries })
    }

    /// Assembles a block matrix; blocks in one block-row share a height and
    /// blocks in one block-column share a width.
    pub fn from_blocks(blocks: &[Vec<NCMatrix>]) -> Result<Self, MatrixError> {
        let first = blocks.first().and_then(|r| r.first()).ok_or(MatrixError::EntryCount { expected: 1, found: 0 })?;
        let algebra = first.algebra;
        let heights: Vec<usize> = blocks.iter().map(|r| r[0].rows).collect();
        let widths: Vec<usize> = blocks[0].iter().map(|b| b.cols).collect();
        for (bi, row) in blocks.iter().enumerate() {
            if row.len() != widths.len() {
                return Err(MatrixError::EntryCount { expected: widths.len(), found: row.len() });
            }
            for (bj, b) in row.iter().enumerate() {
                if b.algebra != algebra {
                    return Err(AlgebraError::PresentationMismatch.into());
                }
                if b.rows != heights[bi] || b.cols != widths[bj] {
                    return Err(MatrixError::DimensionMismatch {
                        op: "stack",
                        left: (heights[bi], widths[bj]),
                        right: (b.rows, b.cols),
                    });
                }
            }
        }
        let rows: usize = heights.iter().sum();
        let cols: usize = widths.iter().sum();
        let mut out = Self::zero(algebra, rows, cols);
        let mut r0 = 0;
        for (bi, row) in blocks.iter().enumerate() {
            let mut c0 = 0;
            for (bj, b) in row.iter().enumerate() {
                for i in 0..b.rows {
                    for j in 0..b.cols {
                        out.entries[(r0 + i) * cols + c0 + j] = b.get(i, j).clone();
                    }
                }
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        Ok(out)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn algebra(&self) -> AlgebraId {
        self.algebra
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &NCPoly {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: NCPoly) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        assert_eq!(p.algebra(), self.algebra, "entry from another algebra");
        self.entries[i * self.cols + j] = p;
    }

    pub fn entries(&self) -> &[NCPoly] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(NCPoly::is_zero)
    }

    /// `((row, col), entry)` for each nonzero entry, row-major.
    pub fn nonzero_entries(&self) -> impl Iterator<Item = ((usize, usize), &NCPoly)> {
        self.entries.iter().enumerate().filter(|(_, e)| !e.is_zero()).map(move |(k, e)| ((k / self.cols, k % self.cols), e))
    }

    pub fn map<F: FnMut(&NCPoly) -> NCPoly>(&self, f: F) -> Self {
        let entries: Vec<NCPoly> = self.entries.iter().map(f).collect();
        let algebra = entries.first().map_or(self.algebra, NCPoly::algebra);
        NCMatrix { rows: self.rows, cols: self.cols, algebra, entries }
    }

    /// Re-tags every entry as an element of another algebra on the same generators.
    pub fn reinterpret(&self, algebra: AlgebraId) -> Self {
        NCMatrix { rows: self.rows, cols: self.cols, algebra, entries: self.entries.iter().map(|e| e.reinterpret(algebra)).collect() }
    }

    fn same_shape(&self, other: &Self, op: &'static str) -> Result<(), MatrixError> {
        if self.algebra != other.algebra {
            return Err(AlgebraError::PresentationMismatch.into());
        }
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(MatrixError::DimensionMismatch { op, left: (self.rows, self.cols), right: (other.rows, other.cols) });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        self.same_shape(other, "add")?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(self.with_entries(entries))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        self.same_shape(other, "subtract")?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(self.with_entries(entries))
    }

    fn with_entries(&self, entries: Vec<NCPoly>) -> Self {
        NCMatrix { rows: self.rows, cols: self.cols, algebra: self.algebra, entries }
    }

    pub fn scale(&self, c: &QScalar) -> Self {
        self.map(|e| e.scale(c))
    }

    /// Entrywise left multiplication by an algebra element.
    pub fn left_mul(&self, p: &NCPoly) -> Result<Self, MatrixError> {
        if p.algebra() != self.algebra {
            return Err(AlgebraError::PresentationMismatch.into());
        }
        Ok(self.map(|e| p * e))
    }

    /// Free-algebra product; entries are not reduced.
    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.algebra != other.algebra {
            return Err(AlgebraError::PresentationMismatch.into());
        }
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch { op: "multiply", left: (self.rows, self.cols), right: (other.rows, other.cols) });
        }
        let (n, m, k) = (self.rows, other.cols, self.cols);
        let mut entries = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                let mut acc = NCPoly::zero(self.algebra);
                for l in 0..k {
                    let a = &self.entries[i * k + l];
                    let b = &other.entries[l * m + j];
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    for (w1, c1) in a.terms() {
                        for (w2, c2) in b.terms() {
                            acc.add_term(w1.concat(w2), &(c1 * c2));
                        }
                    }
                }
                entries.push(acc);
            }
        }
        Ok(NCMatrix { rows: n, cols: m, algebra: self.algebra, entries })
    }

    /// Conjugate transpose: transpose with the involution applied entrywise.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.algebra, self.cols, self.rows, |i, j| self.get(j, i).star())
    }

    /// Sum of the diagonal entries, unreduced.
    pub fn trace_free(&self) -> Result<NCPoly, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let mut acc = NCPoly::zero(self.algebra);
        for i in 0..self.rows {
            acc = &acc + self.get(i, i);
        }
        Ok(acc)
    }

    /// Sum of the diagonal entries in normal form.
    pub fn trace(&self, rules: &RuleSet) -> Result<NCPoly, MatrixError> {
        Ok(rules.normal_form(&self.trace_free()?)?)
    }

    /// Normal form of every entry. The result does not depend on `exec`.
    pub fn reduce(&self, rules: &RuleSet, exec: Execution) -> Result<Self, MatrixError> {
        if rules.algebra() != self.algebra {
            return Err(AlgebraError::PresentationMismatch.into());
        }
        let reduced: Result<Vec<NCPoly>, AlgebraError> = exec.map(&self.entries, |e| rules.normal_form(e)).into_iter().collect();
        Ok(self.with_entries(reduced?))
    }
}

impl fmt::Display for NCMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for NCMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NCMatrix {}x{}\n{self}", self.rows, self.cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentations::build_sphere;

    fn random_matrix(p: &crate::SpherePresentation, seed: u64) -> NCMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let gens = p.alphabet().generators();
        NCMatrix::from_fn(p.algebra(), 2, 2, |_, _| {
            let mut e = p.scalar(QScalar::from_int(rng.gen_range(-2..=2)));
            for _ in 0..2 {
                let g = gens[rng.gen_range(0..gens.len())];
                let c = QScalar::q_pow(rng.gen_range(-1..=1));
                e = &e + &NCPoly::generator(p.algebra(), g).scale(&c);
            }
            e
        })
    }

    #[test]
    fn identity_is_neutral() {
        let p = build_sphere(4).unwrap();
        let a = random_matrix(&p, 1);
        let i = NCMatrix::identity(p.algebra(), 2);
        assert_eq!(i.mul(&a).unwrap(), a);
        assert_eq!(a.mul(&i).unwrap(), a);
        assert!(a.add(&a.scale(&QScalar::from_int(-1))).unwrap().is_zero());
    }

    #[test]
    fn mismatches_are_reported() {
        let p = build_sphere(4).unwrap();
        let other = build_sphere(4).unwrap();
        let a = NCMatrix::identity(p.algebra(), 2);
        let b = NCMatrix::identity(other.algebra(), 2);
        assert_eq!(a.mul(&b).unwrap_err(), MatrixError::Algebra(AlgebraError::PresentationMismatch));
        let c = NCMatrix::zero(p.algebra(), 3, 1);
        assert!(matches!(a.mul(&c).unwrap_err(), MatrixError::DimensionMismatch { .. }));
        assert!(matches!(c.trace_free().unwrap_err(), MatrixError::NotSquare { rows: 3, cols: 1 }));
        assert!(a.reduce(other.rules(), Execution::Sequential).is_err());
    }

    #[test]
    fn adjoint_reverses_products() {
        let p = build_sphere(5).unwrap();
        for seed in 0..10 {
            let a = random_matrix(&p, seed);
            let b = random_matrix(&p, seed + 100);
            assert_eq!(a.adjoint().adjoint(), a);
            let lhs = a.mul(&b).unwrap().adjoint().reduce(p.rules(), Execution::Sequential).unwrap();
            let rhs = b.adjoint().mul(&a.adjoint()).unwrap().reduce(p.rules(), Execution::Sequential).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn trace_of_identity_and_adjoint() {
        let p = build_sphere(6).unwrap();
        assert_eq!(NCMatrix::identity(p.algebra(), 5).trace(p.rules()).unwrap(), p.scalar(QScalar::from_int(5)));
        let a = random_matrix(&p, 7);
        assert_eq!(a.adjoint().trace(p.rules()).unwrap(), p.normal_form(&a.trace_free().unwrap().star()).unwrap());
    }

    #[test]
    fn parallel_reduction_matches_sequential() {
        let p = build_sphere(6).unwrap();
        let a = random_matrix(&p, 3);
        let sq = a.mul(&a).unwrap().mul(&a).unwrap();
        assert_eq!(sq.reduce(p.rules(), Execution::Sequential).unwrap(), sq.reduce(p.rules(), Execution::Parallel).unwrap());
    }

    #[test]
    fn blocks_assemble() {
        let p = build_sphere(4).unwrap();
        let i = NCMatrix::identity(p.algebra(), 2);
        let z = NCMatrix::zero(p.algebra(), 2, 2);
        let big = NCMatrix::from_blocks(&[vec![i.clone(), z.clone()], vec![z, i]]).unwrap();
        assert_eq!(big, NCMatrix::identity(p.algebra(), 4));
    }
}
