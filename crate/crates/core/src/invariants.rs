//! Characters, ranks, degree-zero Chern classes, the 2-sphere charge and
//! numeric checks in the commutative limit.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exec::Execution;
use crate::ncalgebra::{AlgebraError, Generator, NCPoly, Word};
use crate::ncmatrix::{MatrixError, NCMatrix};
use crate::presentations::SpherePresentation;
use crate::qscalar::{rational_to_f64, QScalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantError {
    #[error("rank undefined: trace evaluates to {0}")]
    RankUndefined(String),
    #[error("charge undefined: {0}")]
    ChargeUndefined(String),
    #[error("character value needs a square root of {0}")]
    Radical(String),
    #[error("coefficient of `{word}` in entry ({row},{col}) is singular at q = 1")]
    ClassicalPole { row: usize, col: usize, word: String },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Laurent polynomial in a formal unimodular variable `lambda`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct CharacterValue {
    terms: BTreeMap<i32, QScalar>,
}

impl CharacterValue {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: QScalar) -> Self {
        Self::monomial(c, 0)
    }

    /// `c lambda^k`
    pub fn monomial(c: QScalar, k: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        CharacterValue { terms }
    }

    pub fn coeff(&self, k: i32) -> QScalar {
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &QScalar)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value when free of `lambda`.
    pub fn as_constant(&self) -> Option<QScalar> {
        match self.terms.len() {
            0 => Some(QScalar::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, k: i32, c: &QScalar) {
        let e = self.terms.entry(k).or_default();
        *e = &*e + c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.add_term(a + b, &(x * y));
            }
        }
        out
    }

    /// `lambda -> lambda^-1`, coefficients fixed.
    pub fn star(&self) -> Self {
        CharacterValue { terms: self.terms.iter().map(|(k, c)| (-k, c.clone())).collect() }
    }
}

impl fmt::Display for CharacterValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{c}")?,
                _ if c.is_one() => write!(f, "lambda^{k}")?,
                _ => write!(f, "{c} lambda^{k}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CharacterValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CharacterValue({self})")
    }
}

/// `kappa^2` with `tau(t_n) = kappa lambda`: fixed by sending the radius to its value.
pub fn character_scale_sq(pres: &SpherePresentation) -> Result<QScalar, ScalarError> {
    let n = pres.rank();
    let sigma = pres.scale_sq(n).expect("top level has a scale");
    (sigma * pres.radius_sq()).checked_div(&(&QScalar::one() + &pres.weight(n)))
}

/// The one-dimensional representation: top generators go to multiples of
/// `lambda` and `lambda^-1`, every other generator to zero.
pub fn character(p: &NCPoly, pres: &SpherePresentation) -> Result<CharacterValue, InvariantError> {
    if p.algebra() != pres.algebra() {
        return Err(AlgebraError::PresentationMismatch.into());
    }
    let n = pres.rank();
    let kappa_sq = character_scale_sq(pres)?;
    let kappa = kappa_sq.sqrt_exact();
    let mut out = CharacterValue::zero();
    for (w, c) in p.terms() {
        if w.letters().iter().any(|g| g.level() != n) {
            continue;
        }
        let ups = w.letters().iter().filter(|g| !g.is_starred()).count() as i32;
        let len = w.len() as i32;
        let factor = if len % 2 == 0 {
            kappa_sq.pow(len / 2)?
        } else {
            let k = kappa.as_ref().ok_or_else(|| InvariantError::Radical(kappa_sq.to_string()))?;
            k.pow(len)?
        };
        out.add_term(2 * ups - len, &(c * &factor));
    }
    Ok(out)
}

/// `tau(Tr E)`, which must be a plain integer.
pub fn rank(e: &NCMatrix, pres: &SpherePresentation) -> Result<i64, InvariantError> {
    let tr = e.trace(pres.rules())?;
    let v = character(&tr, pres)?;
    v.as_constant()
        .and_then(|c| c.as_integer())
        .ok_or_else(|| InvariantError::RankUndefined(v.to_string()))
}

/// The reduced trace: `Tr E` in normal form with its unit term removed.
pub fn chern0_class(e: &NCMatrix, pres: &SpherePresentation) -> Result<NCPoly, InvariantError> {
    Ok(e.trace(pres.rules())?.reduced_class())
}

/// Value of the cyclic 0-cocycle on `t0` for the unit 2-sphere: `-2 q^{1/2} / (1 - q)`.
pub fn tau1_on_t0() -> QScalar {
    let num = QScalar::from_int(-2) * QScalar::s();
    num.checked_div(&(QScalar::one() - QScalar::q())).expect("1 - q is nonzero")
}

/// Pairing of the reduced trace of `E` with the cyclic 0-cocycle on the 2-sphere.
pub fn monopole_charge(e: &NCMatrix, pres: &SpherePresentation) -> Result<QScalar, InvariantError> {
    if pres.dim() != 3 {
        return Err(InvariantError::ChargeUndefined(format!("only the 2-sphere is supported, got N = {}", pres.dim())));
    }
    if !pres.radius_sq().is_one() || !pres.scale_sq(0).is_some_and(QScalar::is_one) {
        return Err(InvariantError::ChargeUndefined("the cocycle is fixed for unit radius and unscaled t0".into()));
    }
    let class = chern0_class(e, pres)?;
    let t0 = Word::new(vec![Generator::x(0)]);
    if let Some((w, _)) = class.terms().find(|(w, _)| **w != t0) {
        return Err(InvariantError::ChargeUndefined(format!("class has a `{w}` component outside the span of t0")));
    }
    Ok(&class.coeff(&t0) * &tau1_on_t0())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalReport {
    pub samples: usize,
    pub seed: u64,
    /// Frobenius norm of `P^2 - P`, maximized over samples.
    pub max_idempotent: f64,
    /// Frobenius norm of `P - P*`, maximized over samples.
    pub max_adjoint: f64,
    /// `|tr P - rank|`, maximized over samples.
    pub max_trace_defect: f64,
    pub rank: i64,
}

struct ClassicalEntry {
    terms: Vec<(Vec<Generator>, f64)>,
}

/// Seeded points on the unit sphere `S^{N-1}` from uniform spherical angles.
fn sphere_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let mut y = vec![0.0; dim];
    let mut radius = 1.0;
    for (i, slot) in y.iter_mut().enumerate().take(dim - 1) {
        let upper = if i == dim - 2 { 2.0 * std::f64::consts::PI } else { std::f64::consts::PI };
        let angle = rng.gen_range(0.0..upper);
        *slot = radius * angle.cos();
        radius *= angle.sin();
    }
    y[dim - 1] = radius;
    y
}

/// Substitutes seeded points of the classical sphere for the generators and
/// checks the projector identities numerically.
pub fn classical_sample_eval(
    e: &NCMatrix,
    pres: &SpherePresentation,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<ClassicalReport, InvariantError> {
    if !e.is_square() {
        return Err(MatrixError::NotSquare { rows: e.rows(), cols: e.cols() }.into());
    }
    let dim = e.rows();
    let mut entries = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut terms = Vec::new();
            for (w, c) in e.get(i, j).terms() {
                let v = c.classical().map_err(|_| InvariantError::ClassicalPole { row: i, col: j, word: w.to_string() })?;
                terms.push((w.letters().to_vec(), rational_to_f64(&v)));
            }
            entries.push(ClassicalEntry { terms });
        }
    }
    let radius = rational_to_f64(&pres.radius_sq().classical()?);
    let mut coord_scale = BTreeMap::new();
    for (&level, s) in pres.scales() {
        let sigma = rational_to_f64(&s.classical()?);
        let half = if level == 0 { 1.0 } else { 0.5 };
        coord_scale.insert(level, (radius * sigma * half).sqrt());
    }
    let expected = match rank(e, pres) {
        Ok(r) => Some(r),
        Err(InvariantError::RankUndefined(_)) | Err(InvariantError::Radical(_)) => None,
        Err(err) => return Err(err),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..samples).map(|_| sphere_point(&mut rng, pres.dim())).collect();
    let n = pres.rank();
    let has_x0 = pres.has_x0();
    let results = exec.map(&points, |y| {
        // values of t_k and t_k* at this point, indexed by generator index
        let mut vals = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        let mut next = 0;
        if has_x0 {
            vals[0] = Complex64::new(coord_scale[&0] * y[0], 0.0);
            next = 1;
        }
        for k in 1..=n {
            let z = Complex64::new(y[next], y[next + 1]) * coord_scale[&k];
            next += 2;
            vals[Generator::x(k).index()] = z;
            vals[Generator::x_star(k).index()] = z.conj();
        }
        let p = DMatrix::from_fn(dim, dim, |i, j| {
            entries[i * dim + j]
                .terms
                .iter()
                .map(|(w, c)| w.iter().fold(Complex64::new(*c, 0.0), |acc, g| acc * vals[g.index()]))
                .sum::<Complex64>()
        });
        let idem = (&p * &p - &p).norm();
        let adj = (p.adjoint() - &p).norm();
        (idem, adj, p.trace())
    });

    let rank = expected.unwrap_or_else(|| results.first().map_or(0, |r| r.2.re.round() as i64));
    let mut report = ClassicalReport { samples, seed, max_idempotent: 0.0, max_adjoint: 0.0, max_trace_defect: 0.0, rank };
    for (idem, adj, tr) in results {
        report.max_idempotent = report.max_idempotent.max(idem);
        report.max_adjoint = report.max_adjoint.max(adj);
        report.max_trace_defect = report.max_trace_defect.max((tr - Complex64::new(rank as f64, 0.0)).norm());
    }
    Ok(report)
}
