//! Projectors over the spheres: twisted projectors of size `2^n`, the normal
//! projector built from the radius vector and its complement.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::exec::Execution;
use crate::expr::parse_poly;
use crate::ncalgebra::{AlgebraError, NCPoly, Word};
use crate::ncmatrix::{MatrixError, NCMatrix};
use crate::presentations::{build_sphere, PresentationError, SpherePresentation};
use crate::qscalar::{QScalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BundleError {
    #[error("generator scales differ across levels; use a uniformly scaled presentation")]
    NonUniformScales,
    #[error("presentation is not compatible with the standard sphere: {0}")]
    Incompatible(String),
    #[error("inductive step failed: {} residual identities", .0.len())]
    InductiveStep(Vec<(String, NCPoly)>),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

// Entries in the scaled generators, overall factor 1/2 applied afterwards.
const TWISTED_S2: [&str; 4] = ["1 + s^-1 x0", "x1", "x1*", "1 - s x0"];

const TWISTED_S3: [&str; 16] = [
    "1", "q^-1 x1", "x2", "0", //
    "q^-1 x1*", "1", "0", "x2", //
    "x2*", "0", "1", "-x1", //
    "0", "x2*", "-x1*", "1",
];

const TWISTED_S4: [&str; 16] = [
    "1 + s^-3 x0", "q^-1 x1", "x2", "0", //
    "q^-1 x1*", "1 - s^-1 x0", "0", "x2", //
    "x2*", "0", "1 - s^-1 x0", "-x1", //
    "0", "x2*", "-x1*", "1 + s x0",
];

const TWISTED_S5: [&str; 64] = [
    "1", "q^-2 x1", "q^-1 x2", "0", "x3", "0", "0", "0", //
    "q^-2 x1*", "1", "0", "q^-1 x2", "0", "x3", "0", "0", //
    "q^-1 x2*", "0", "1", "-q^-1 x1", "0", "0", "x3", "0", //
    "0", "q^-1 x2*", "-q^-1 x1*", "1", "0", "0", "0", "x3", //
    "x3*", "0", "0", "0", "1", "-q^-1 x1", "-x2", "0", //
    "0", "x3*", "0", "0", "-q^-1 x1*", "1", "0", "-x2", //
    "0", "0", "x3*", "0", "-x2*", "0", "1", "x1", //
    "0", "0", "0", "x3*", "0", "-x2*", "x1*", "1",
];

fn table(pres: &SpherePresentation, entries: &[&str]) -> NCMatrix {
    let size = (entries.len() as f64).sqrt() as usize;
    let half = QScalar::ratio(1, 2);
    let parsed = entries
        .iter()
        .map(|e| parse_poly(e, pres.alphabet()).expect("built-in table parses").scale(&half))
        .collect();
    NCMatrix::from_entries(pres.algebra(), size, size, parsed).expect("square table")
}

/// The standard sphere and its twisted projector.
fn standard_twisted(dim: usize) -> Result<(SpherePresentation, NCMatrix), BundleError> {
    let pres = build_sphere(dim)?;
    let e = match dim {
        3 => table(&pres, &TWISTED_S2),
        4 => table(&pres, &TWISTED_S3),
        5 => table(&pres, &TWISTED_S4),
        6 => table(&pres, &TWISTED_S5),
        _ => {
            let (lower, e_lower) = standard_twisted(dim - 2)?;
            inductive_step(&e_lower, &lower, &pres, &QScalar::q_pow(-1), &QScalar::one())?
        }
    };
    Ok((pres, e))
}

/// Rewrites a matrix over `from` into `to`, where both present the same
/// sphere on differently scaled generators.
fn dress(m: &NCMatrix, from: &SpherePresentation, to: &SpherePresentation) -> Result<NCMatrix, BundleError> {
    if from.dim() != to.dim() {
        return Err(BundleError::Incompatible(format!("N = {} vs N = {}", from.dim(), to.dim())));
    }
    if from.radius_sq() != to.radius_sq() {
        return Err(BundleError::Incompatible(format!("radius {} vs {}", to.radius_sq(), from.radius_sq())));
    }
    // t_from = f t_to with f^2 = sigma_from^2 / sigma_to^2
    let mut factor_sq = BTreeMap::new();
    for (&level, s) in from.scales() {
        let t = to.scale_sq(level).expect("same alphabet");
        factor_sq.insert(level, s.checked_div(t)?);
    }
    let mut out = Vec::with_capacity(m.entries().len());
    for e in m.entries() {
        let mut d = NCPoly::zero(to.algebra());
        for (w, c) in e.terms() {
            let mut sq = QScalar::one();
            for g in w.letters() {
                sq = &sq * &factor_sq[&g.level()];
            }
            let f = sq.sqrt_exact().ok_or_else(|| {
                BundleError::Incompatible(format!("rescaling `{w}` needs a square root of {sq}"))
            })?;
            d.add_term(w.clone(), &(c * &f));
        }
        out.push(d);
    }
    Ok(NCMatrix::from_entries(to.algebra(), m.rows(), m.cols(), out)?)
}

/// The `2^n x 2^n` twisted projector over `pres`.
///
/// `N = 3..6` use the known closed forms; larger `N` apply
/// [`inductive_step`] from two dimensions down, each step verified.
pub fn twisted_projector(pres: &SpherePresentation) -> Result<NCMatrix, BundleError> {
    let (standard, e) = standard_twisted(pres.dim())?;
    dress(&e, &standard, pres)
}

/// `1/2 [[I + alpha u, beta y I], [beta y* I, I - u]]` with `u = 2 e_lower - I`
/// read in `upper` and `y` the top generator of `upper`.
///
/// The lower generators must carry the same scales in both presentations.
/// Checks `alpha^2 u^2 + beta^2 y y* = I`, `u^2 + beta^2 y* y = I` and
/// `alpha u y = y u` modulo the upper relations and returns the residuals
/// when any fails.
pub fn inductive_step(
    e_lower: &NCMatrix,
    lower: &SpherePresentation,
    upper: &SpherePresentation,
    alpha: &QScalar,
    beta: &QScalar,
) -> Result<NCMatrix, BundleError> {
    if upper.dim() != lower.dim() + 2 {
        return Err(BundleError::Incompatible(format!("N = {} does not sit two below N = {}", lower.dim(), upper.dim())));
    }
    for (level, s) in lower.scales() {
        if upper.scale_sq(*level) != Some(s) {
            return Err(BundleError::Incompatible(format!("scale of level {level} differs")));
        }
    }
    if e_lower.algebra() != lower.algebra() {
        return Err(AlgebraError::PresentationMismatch.into());
    }
    let id = upper.algebra();
    let k = e_lower.rows();
    let eye = NCMatrix::identity(id, k);
    let u = e_lower.reinterpret(id).scale(&QScalar::from_int(2)).sub(&eye)?;
    let n = upper.rank();
    let y = upper.gen(n, false);
    let ys = upper.gen(n, true);

    let rules = upper.rules();
    let exec = Execution::default();
    let u2 = u.mul(&u)?;
    let b2 = beta * beta;
    let first = u2.scale(&(alpha * alpha)).add(&eye.scale(&b2).left_mul(&(&y * &ys))?)?.sub(&eye)?;
    let second = u2.add(&eye.scale(&b2).left_mul(&(&ys * &y))?)?.sub(&eye)?;
    let uy = u.map(|e| e * &y).scale(alpha);
    let yu = u.left_mul(&y)?;
    let third = uy.sub(&yu)?;

    let mut witnesses = Vec::new();
    for (label, m) in [("alpha^2 u^2 + beta^2 y y* - I", first), ("u^2 + beta^2 y* y - I", second), ("alpha u y - y u", third)] {
        let r = m.reduce(rules, exec)?;
        for ((i, j), e) in r.nonzero_entries() {
            witnesses.push((format!("{label} [{i},{j}]"), e.clone()));
        }
    }
    if !witnesses.is_empty() {
        return Err(BundleError::InductiveStep(witnesses));
    }

    let half = QScalar::ratio(1, 2);
    let top_left = eye.add(&u.scale(alpha))?;
    let top_right = eye.scale(beta).left_mul(&y)?;
    let bottom_left = eye.scale(beta).left_mul(&ys)?;
    let bottom_right = eye.sub(&u)?;
    Ok(NCMatrix::from_blocks(&[vec![top_left, top_right], vec![bottom_left, bottom_right]])?.scale(&half))
}

/// The radius vector as a row, together with its squared norm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalVector {
    /// `(q^{-rho_n} t_n, ..., q^{-rho_1} t_1, [t_0], t_1*, ..., t_n*)`
    pub row: NCMatrix,
    /// `row row*` reduces to this constant.
    pub norm_sq: QScalar,
}

/// The unnormalized row of the radius vector, in a presentation whose
/// generators all share one scale `sigma^2`; `norm_sq = sigma^2 r^2`.
pub fn normal_vector(pres: &SpherePresentation) -> Result<NormalVector, BundleError> {
    let mut scales = pres.scales().values();
    let sigma = scales.next().expect("at least one level").clone();
    if scales.any(|s| *s != sigma) {
        return Err(BundleError::NonUniformScales);
    }
    let n = pres.rank();
    let mut entries = Vec::with_capacity(pres.dim());
    for k in (1..=n).rev() {
        let m = pres.metric_diag(k as i32).expect("level has rho");
        entries.push(pres.gen(k, false).scale(&m));
    }
    if pres.has_x0() {
        entries.push(pres.gen(0, false));
    }
    for k in 1..=n {
        entries.push(pres.gen(k, true));
    }
    let row = NCMatrix::from_entries(pres.algebra(), 1, pres.dim(), entries)?;
    Ok(NormalVector { row, norm_sq: &sigma * pres.radius_sq() })
}

/// `|v><v| / <v|v>` from the radius vector.
pub fn normal_projector(pres: &SpherePresentation) -> Result<NCMatrix, BundleError> {
    let v = normal_vector(pres)?;
    let inv = v.norm_sq.inv()?;
    Ok(v.row.adjoint().mul(&v.row)?.scale(&inv))
}

/// `I - e_normal`.
pub fn cotangent_projector(pres: &SpherePresentation) -> Result<NCMatrix, BundleError> {
    let e = normal_projector(pres)?;
    Ok(NCMatrix::identity(pres.algebra(), pres.dim()).sub(&e)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub check: &'static str,
    pub row: usize,
    pub col: usize,
    pub residual: NCPoly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionReport {
    pub idempotent: bool,
    pub self_adjoint: bool,
    /// Nonzero reduced entries of `E^2 - E` and `E* - E`, row-major.
    pub witnesses: Vec<Witness>,
}

impl ProjectionReport {
    pub fn pass(&self) -> bool {
        self.idempotent && self.self_adjoint
    }

    pub fn residual_term_count(&self) -> usize {
        self.witnesses.iter().map(|w| w.residual.term_count()).sum()
    }
}

/// Reduces `E^2 - E` and `E* - E` and reports what survives.
pub fn verify_projection(e: &NCMatrix, pres: &SpherePresentation, exec: Execution) -> Result<ProjectionReport, BundleError> {
    if !e.is_square() {
        return Err(MatrixError::NotSquare { rows: e.rows(), cols: e.cols() }.into());
    }
    let idem = e.mul(e)?.sub(e)?.reduce(pres.rules(), exec)?;
    let adj = e.adjoint().sub(e)?.reduce(pres.rules(), exec)?;
    let mut witnesses = Vec::new();
    for (check, m) in [("idempotent", &idem), ("self-adjoint", &adj)] {
        for ((row, col), r) in m.nonzero_entries() {
            witnesses.push(Witness { check, row, col, residual: r.clone() });
        }
    }
    Ok(ProjectionReport { idempotent: idem.is_zero(), self_adjoint: adj.is_zero(), witnesses })
}

/// Row-echelon basis of a subspace of `Q(s)^(words)`.
#[derive(Debug, Default, Clone)]
struct SpanBasis {
    rows: Vec<(Word, BTreeMap<Word, QScalar>)>,
}

impl SpanBasis {
    fn residue(&self, v: &NCPoly) -> BTreeMap<Word, QScalar> {
        let mut v: BTreeMap<Word, QScalar> = v.terms().map(|(w, c)| (w.clone(), c.clone())).collect();
        for (pivot, row) in &self.rows {
            let Some(c) = v.get(pivot).cloned() else { continue };
            for (w, a) in row {
                let e = v.entry(w.clone()).or_default();
                *e = &*e - &(&c * a);
                if e.is_zero() {
                    v.remove(w);
                }
            }
        }
        v
    }

    fn contains(&self, v: &NCPoly) -> bool {
        self.residue(v).is_empty()
    }

    /// Adds `v`; returns whether it was independent.
    fn insert(&mut self, v: &NCPoly) -> bool {
        let r = self.residue(v);
        let Some((pivot, lead)) = r.iter().next_back().map(|(w, c)| (w.clone(), c.clone())) else {
            return false;
        };
        let inv = lead.inv().expect("nonzero pivot");
        let row: BTreeMap<Word, QScalar> = r.into_iter().map(|(w, c)| (w, &c * &inv)).collect();
        // keep earlier rows free of the new pivot
        for (_, other) in &mut self.rows {
            if let Some(c) = other.get(&pivot).cloned() {
                for (w, a) in &row {
                    let e = other.entry(w.clone()).or_default();
                    *e = &*e - &(&c * a);
                    if e.is_zero() {
                        other.remove(w);
                    }
                }
            }
        }
        self.rows.push((pivot, row));
        true
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSpanReport {
    /// Every defining relation is a linear combination of the entries of
    /// `E^2 - E` and their adjoints.
    pub relations_in_entry_span: bool,
    /// Every entry of `E^2 - E` is a linear combination of defining relations.
    pub entries_in_relation_span: bool,
    pub entry_span_dim: usize,
    pub relation_span_dim: usize,
    /// Labels of relations outside the entry span.
    pub missing_relations: Vec<String>,
    /// Entries of `E^2 - E` outside the relation span.
    pub stray_entries: Vec<((usize, usize), NCPoly)>,
}

impl RelationSpanReport {
    pub fn pass(&self) -> bool {
        self.relations_in_entry_span && self.entries_in_relation_span
    }
}

/// Compares the linear span of the entries of `E^2 - E`, formed in the free
/// algebra, with the span of the defining relations of `pres`.
pub fn relations_from_projector(e_free: &NCMatrix, pres: &SpherePresentation) -> Result<RelationSpanReport, BundleError> {
    if e_free.algebra() != pres.algebra() {
        return Err(AlgebraError::PresentationMismatch.into());
    }
    let defect = e_free.mul(e_free)?.sub(e_free)?;
    let mut entries = SpanBasis::default();
    for (_, p) in defect.nonzero_entries() {
        entries.insert(p);
        entries.insert(&p.star());
    }
    let relations = pres.relations();
    let mut rel_span = SpanBasis::default();
    for (_, r) in &relations {
        rel_span.insert(r);
    }
    let missing_relations: Vec<String> =
        relations.iter().filter(|(_, r)| !entries.contains(r)).map(|(label, _)| label.clone()).collect();
    let stray_entries: Vec<((usize, usize), NCPoly)> =
        defect.nonzero_entries().filter(|(_, p)| !rel_span.contains(p)).map(|(ij, p)| (ij, p.clone())).collect();
    Ok(RelationSpanReport {
        relations_in_entry_span: missing_relations.is_empty(),
        entries_in_relation_span: stray_entries.is_empty(),
        entry_span_dim: entries.dim(),
        relation_span_dim: rel_span.dim(),
        missing_relations,
        stray_entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncalgebra::Generator;

    fn seq() -> Execution {
        Execution::Sequential
    }

    #[test]
    fn low_dimensional_projectors_verify() {
        for n in 3..=6 {
            let p = build_sphere(n).unwrap();
            let e = twisted_projector(&p).unwrap();
            assert_eq!(e.rows(), 1 << (n / 2));
            let report = verify_projection(&e, &p, seq()).unwrap();
            assert!(report.pass(), "N = {n}: {:?}", report.witnesses);
        }
    }

    #[test]
    fn identity_is_a_projection() {
        let p = build_sphere(4).unwrap();
        let report = verify_projection(&NCMatrix::identity(p.algebra(), 3), &p, seq()).unwrap();
        assert!(report.pass());
        assert_eq!(report.residual_term_count(), 0);
    }

    #[test]
    fn perturbed_entry_breaks_idempotency() {
        let p = build_sphere(3).unwrap();
        let mut e = twisted_projector(&p).unwrap();
        let doubled = e.get(0, 1).scale(&QScalar::from_int(2));
        e.set(0, 1, doubled);
        let report = verify_projection(&e, &p, seq()).unwrap();
        assert!(!report.idempotent);
        assert!(report.witnesses.iter().any(|w| w.check == "idempotent" && !w.residual.is_zero()));
    }

    #[test]
    fn inductive_step_reproduces_closed_forms() {
        for (low, high) in [(3, 5), (4, 6)] {
            let lower = build_sphere(low).unwrap();
            let upper = build_sphere(high).unwrap();
            let e = twisted_projector(&lower).unwrap();
            let stepped = inductive_step(&e, &lower, &upper, &QScalar::q_pow(-1), &QScalar::one()).unwrap();
            assert_eq!(stepped, twisted_projector(&upper).unwrap(), "N = {high}");
        }
    }

    #[test]
    fn inductive_step_rejects_wrong_alpha() {
        let lower = build_sphere(3).unwrap();
        let upper = build_sphere(5).unwrap();
        let e = twisted_projector(&lower).unwrap();
        match inductive_step(&e, &lower, &upper, &QScalar::one(), &QScalar::one()) {
            Err(BundleError::InductiveStep(w)) => assert!(!w.is_empty()),
            other => panic!("expected residuals, got {other:?}"),
        }
    }

    #[test]
    fn normal_row_for_two_sphere() {
        let p = build_sphere(3).unwrap().with_unit_scales().unwrap();
        let v = normal_vector(&p).unwrap();
        // q^{-rho_1} = q^{1/2} for the positive index
        let expected = ["s x1", "x0", "x1*"].map(|t| parse_poly(t, p.alphabet()).unwrap());
        assert_eq!(v.row.entries(), &expected);
        assert!(normal_vector(&build_sphere(3).unwrap()).is_err());
        let four = normal_vector(&build_sphere(4).unwrap()).unwrap();
        assert!(four.row.entries().iter().all(|e| !e.terms().any(|(w, _)| w.letters().contains(&Generator::x(0)))));
    }

    #[test]
    fn normal_and_cotangent_projectors() {
        for n in 3..=6 {
            let p = build_sphere(n).unwrap().with_unit_scales().unwrap();
            let v = normal_vector(&p).unwrap();
            let norm = v.row.mul(&v.row.adjoint()).unwrap().reduce(p.rules(), seq()).unwrap();
            assert_eq!(norm.get(0, 0), &p.scalar(v.norm_sq.clone()));
            let en = normal_projector(&p).unwrap();
            let ec = cotangent_projector(&p).unwrap();
            assert!(verify_projection(&en, &p, seq()).unwrap().pass());
            assert!(verify_projection(&ec, &p, seq()).unwrap().pass());
            assert!(en.mul(&ec).unwrap().reduce(p.rules(), seq()).unwrap().is_zero());
            assert_eq!(en.add(&ec).unwrap(), NCMatrix::identity(p.algebra(), n));
        }
    }

    #[test]
    fn projector_relations_span() {
        for n in 3..=6 {
            let p = build_sphere(n).unwrap();
            let e = twisted_projector(&p).unwrap();
            let report = relations_from_projector(&e, &p).unwrap();
            assert!(report.pass(), "N = {n}: {report:?}");
        }
        let p = build_sphere(4).unwrap();
        let report = relations_from_projector(&NCMatrix::identity(p.algebra(), 4), &p).unwrap();
        assert!(!report.relations_in_entry_span);
        assert!(report.entries_in_relation_span);
    }
}
