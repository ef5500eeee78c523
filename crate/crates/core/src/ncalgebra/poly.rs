//! Generators, words and noncommutative polynomials with `Q(s)` coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use crate::qscalar::QScalar;

use super::AlgebraError;

/// Identifies the ambient algebra a polynomial belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgebraId(u64);

static NEXT_ALGEBRA: AtomicU64 = AtomicU64::new(1);

impl AlgebraId {
    pub fn fresh() -> Self {
        AlgebraId(NEXT_ALGEBRA.fetch_add(1, AtomicOrdering::Relaxed))
    }
}

/// A sphere generator `x_i` or `x_i*`.
///
/// Stored as its position in the total order
/// `x0 < x1* < x1 < x2* < x2 < ...`, so the derived `Ord` is that order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator(u8);

impl Generator {
    /// Panics for a starred level-0 generator; `x0` is self-adjoint.
    pub fn new(level: usize, starred: bool) -> Self {
        assert!(level > 0 || !starred, "x0 is self-adjoint and has no starred form");
        assert!(level < 128, "generator level out of range");
        if level == 0 {
            Generator(0)
        } else {
            Generator((2 * level - usize::from(starred)) as u8)
        }
    }

    pub fn x(level: usize) -> Self {
        Self::new(level, false)
    }

    pub fn x_star(level: usize) -> Self {
        Self::new(level, true)
    }

    pub fn level(self) -> usize {
        (self.0 as usize).div_ceil(2)
    }

    pub fn is_starred(self) -> bool {
        self.0 % 2 == 1
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Self {
        Generator(i as u8)
    }

    pub fn star(self) -> Self {
        match self.0 {
            0 => self,
            i if i % 2 == 1 => Generator(i + 1),
            i => Generator(i - 1),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}{}", self.level(), if self.is_starred() { "*" } else { "" })
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A monomial. Words compare by length first, then lexicographically in the
/// generator order.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub(crate) Vec<Generator>);

impl Word {
    pub fn unit() -> Self {
        Word(Vec::new())
    }

    pub fn new(gens: Vec<Generator>) -> Self {
        Word(gens)
    }

    pub fn letters(&self) -> &[Generator] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn star(&self) -> Word {
        Word(self.0.iter().rev().map(|g| g.star()).collect())
    }

    pub fn max_level(&self) -> usize {
        self.0.iter().map(|g| g.level()).max().unwrap_or(0)
    }

    /// Number of out-of-order pairs with respect to the generator order.
    pub fn inversions(&self) -> usize {
        let w = &self.0;
        (0..w.len()).map(|i| w[i + 1..].iter().filter(|&&b| b < w[i]).count()).sum()
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

/// A finite `Q(s)`-linear combination of words over one algebra.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NCPoly {
    algebra: AlgebraId,
    terms: BTreeMap<Word, QScalar>,
}

impl NCPoly {
    pub fn zero(algebra: AlgebraId) -> Self {
        NCPoly { algebra, terms: BTreeMap::new() }
    }

    pub fn one(algebra: AlgebraId) -> Self {
        Self::constant(algebra, QScalar::one())
    }

    pub fn constant(algebra: AlgebraId, c: QScalar) -> Self {
        Self::monomial(algebra, c, Word::unit())
    }

    pub fn generator(algebra: AlgebraId, g: Generator) -> Self {
        Self::monomial(algebra, QScalar::one(), Word(vec![g]))
    }

    pub fn monomial(algebra: AlgebraId, c: QScalar, w: Word) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(w, c);
        }
        NCPoly { algebra, terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, QScalar)>>(algebra: AlgebraId, terms: I) -> Self {
        let mut p = Self::zero(algebra);
        for (w, c) in terms {
            p.add_term(w, &c);
        }
        p
    }

    pub fn algebra(&self) -> AlgebraId {
        self.algebra
    }

    /// Re-tags the polynomial as an element of another algebra on the same
    /// generator symbols.
    pub fn reinterpret(&self, algebra: AlgebraId) -> Self {
        NCPoly { algebra, terms: self.terms.clone() }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Word, &QScalar)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<Word, QScalar> {
        self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, w: &Word) -> QScalar {
        self.terms.get(w).cloned().unwrap_or_else(QScalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the unit word.
    pub fn constant_term(&self) -> QScalar {
        self.coeff(&Word::unit())
    }

    /// The scalar value if the polynomial has no generator content.
    pub fn as_constant(&self) -> Option<QScalar> {
        match self.terms.len() {
            0 => Some(QScalar::zero()),
            1 => self.terms.get(&Word::unit()).cloned(),
            _ => None,
        }
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn max_level(&self) -> usize {
        self.terms.keys().map(Word::max_level).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, w: Word, c: &QScalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn check(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.algebra == other.algebra {
            Ok(())
        } else {
            Err(AlgebraError::PresentationMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.checked_add(&other.neg_ref())
    }

    /// Concatenation product, no reduction.
    pub fn checked_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        let mut out = Self::zero(self.algebra);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(w1.concat(w2), &(c1 * c2));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &QScalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.algebra);
        }
        NCPoly { algebra: self.algebra, terms: self.terms.iter().map(|(w, a)| (w.clone(), a * c)).collect() }
    }

    fn neg_ref(&self) -> Self {
        NCPoly { algebra: self.algebra, terms: self.terms.iter().map(|(w, a)| (w.clone(), -a)).collect() }
    }

    /// The involution: reverses words, flips stars, fixes coefficients (q is real).
    pub fn star(&self) -> Self {
        NCPoly { algebra: self.algebra, terms: self.terms.iter().map(|(w, c)| (w.star(), c.clone())).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.algebra);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Drops the unit-word term: the image in the algebra modulo scalars.
    pub fn reduced_class(&self) -> Self {
        let mut out = self.clone();
        out.terms.remove(&Word::unit());
        out
    }
}

// Operator forms panic on mixed algebras; the `checked_*` methods report it.
impl Add<&NCPoly> for &NCPoly {
    type Output = NCPoly;
    fn add(self, rhs: &NCPoly) -> NCPoly {
        self.checked_add(rhs).expect("adding polynomials from different algebras")
    }
}

impl Sub<&NCPoly> for &NCPoly {
    type Output = NCPoly;
    fn sub(self, rhs: &NCPoly) -> NCPoly {
        self.checked_sub(rhs).expect("subtracting polynomials from different algebras")
    }
}

impl Mul<&NCPoly> for &NCPoly {
    type Output = NCPoly;
    fn mul(self, rhs: &NCPoly) -> NCPoly {
        self.checked_mul(rhs).expect("multiplying polynomials from different algebras")
    }
}

impl Neg for &NCPoly {
    type Output = NCPoly;
    fn neg(self) -> NCPoly {
        self.neg_ref()
    }
}

impl fmt::Display for NCPoly {
    /// Serialized form, re-readable by [`crate::expr::parse_poly`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let (negative, mag) = split_sign(c);
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { "-" } else { "+" })?;
            }
            if w.is_empty() {
                write!(f, "{}", scalar_factor(&mag))?;
            } else if mag.is_one() {
                write!(f, "{w}")?;
            } else {
                write!(f, "{} {w}", scalar_factor(&mag))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NCPoly({self})")
    }
}

/// Pulls a leading minus out of single-term Laurent coefficients so output
/// reads `a - b` rather than `a + -b`.
fn split_sign(c: &QScalar) -> (bool, QScalar) {
    let terms = c.numerator_terms();
    if c.is_laurent() && terms.len() == 1 && terms[0].1 < num_rational::BigRational::from_integer(0.into()) {
        (true, -c)
    } else {
        (false, c.clone())
    }
}

fn scalar_factor(c: &QScalar) -> String {
    let text = c.to_string();
    if text.starts_with('(') || !text.contains('/') && !text.contains('*') {
        text
    } else {
        format!("({text})")
    }
}
