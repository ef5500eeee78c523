//! Truncated Hilbert-space representation of `S^4_q` on the basis `psi_{n,m}`,
//! `0 <= n, m <= M`, used as a floating-point oracle.
//!
//! All generators act as weighted shifts, so operators are stored sparsely.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::exec::Execution;
use crate::ncalgebra::{Generator, NCPoly};
use crate::ncmatrix::NCMatrix;
use crate::presentations::SpherePresentation;
use crate::qscalar::ScalarError;

/// Largest supported cutoff; the space has `(M+1)^2` dimensions.
pub const MAX_CUTOFF: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepError {
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("cutoff {cutoff} exceeds the supported maximum {max}")]
    CutoffTooLarge { cutoff: usize, max: usize },
    #[error("the representation is of the 4-sphere (N = 5), got N = {0}")]
    WrongSphere(usize),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Square complex matrix stored as sorted sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseOp {
    pub fn zero(dim: usize) -> Self {
        SparseOp { dim, rows: vec![Vec::new(); dim] }
    }

    pub fn identity(dim: usize) -> Self {
        SparseOp { dim, rows: (0..dim).map(|i| vec![(i, Complex64::new(1.0, 0.0))]).collect() }
    }

    fn from_map(dim: usize, entries: BTreeMap<(usize, usize), Complex64>) -> Self {
        let mut out = Self::zero(dim);
        for ((i, j), v) in entries {
            if v != Complex64::new(0.0, 0.0) {
                out.rows[i].push((j, v));
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rows[i].iter().find(|(c, _)| *c == j).map_or(Complex64::new(0.0, 0.0), |(_, v)| *v)
    }

    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |(j, v)| (i, *j, *v)))
    }

    pub fn mul(&self, other: &SparseOp) -> SparseOp {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc: BTreeMap<usize, Complex64> = BTreeMap::new();
                for (k, a) in row {
                    for (j, b) in &other.rows[*k] {
                        *acc.entry(*j).or_default() += a * b;
                    }
                }
                acc.into_iter().filter(|(_, v)| *v != Complex64::new(0.0, 0.0)).collect()
            })
            .collect();
        SparseOp { dim: self.dim, rows }
    }

    pub fn add_scaled(&self, other: &SparseOp, c: Complex64) -> SparseOp {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut acc: BTreeMap<usize, Complex64> = a.iter().copied().collect();
                for (j, v) in b {
                    *acc.entry(*j).or_default() += c * v;
                }
                acc.into_iter().collect()
            })
            .collect();
        SparseOp { dim: self.dim, rows }
    }

    pub fn scale(&self, c: Complex64) -> SparseOp {
        SparseOp { dim: self.dim, rows: self.rows.iter().map(|r| r.iter().map(|(j, v)| (*j, v * c)).collect()).collect() }
    }

    pub fn adjoint(&self) -> SparseOp {
        let mut entries = BTreeMap::new();
        for (i, j, v) in self.nonzeros() {
            entries.insert((j, i), v.conj());
        }
        Self::from_map(self.dim, entries)
    }

    /// Largest `|A_ij|` over columns `j` with `keep(j)`.
    pub fn max_abs_on_columns<F: Fn(usize) -> bool>(&self, keep: F) -> f64 {
        self.nonzeros().filter(|(_, j, _)| keep(*j)).map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.nonzeros() {
            m[(i, j)] = v;
        }
        m
    }

    /// Largest singular value. Weighted shifts have orthogonal columns, which
    /// is detected and used; otherwise falls back to a dense SVD.
    pub fn top_singular_value(&self) -> f64 {
        let gram = self.adjoint().mul(self);
        let diagonal = gram.nonzeros().all(|(i, j, v)| i == j || v.norm() < 1e-300);
        if diagonal {
            gram.nonzeros().map(|(_, _, v)| v.re).fold(0.0, f64::max).sqrt()
        } else {
            self.to_dense().singular_values().max()
        }
    }
}

#[derive(Debug, Clone)]
pub struct TruncatedRep {
    q: f64,
    r: f64,
    cutoff: usize,
    sign: Sign,
    /// Indexed by generator index: x0, x1*, x1, x2*, x2.
    ops: Vec<SparseOp>,
}

/// Row-major position of `psi_{n,m}`.
pub fn basis_index(cutoff: usize, n: usize, m: usize) -> usize {
    n * (cutoff + 1) + m
}

fn check_params(q: f64, r: f64, cutoff: usize) -> Result<(), RepError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(RepError::Domain(format!("q = {q} must lie in (0, 1)")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(RepError::Domain(format!("r = {r} must be positive")));
    }
    if cutoff < 2 {
        return Err(RepError::Domain(format!("cutoff {cutoff} must be at least 2")));
    }
    if cutoff > MAX_CUTOFF {
        return Err(RepError::CutoffTooLarge { cutoff, max: MAX_CUTOFF });
    }
    Ok(())
}

pub fn build_rep_s4(q: f64, r: f64, cutoff: usize, sign: Sign) -> Result<TruncatedRep, RepError> {
    check_params(q, r, cutoff)?;
    let dim = (cutoff + 1) * (cutoff + 1);
    let norm = 1.0 + q.powi(3);
    let idx = |n: usize, m: usize| basis_index(cutoff, n, m);
    let c = |x: f64| Complex64::new(x, 0.0);
    let mut x0 = BTreeMap::new();
    let mut x1 = BTreeMap::new();
    let mut x1s = BTreeMap::new();
    let mut x2 = BTreeMap::new();
    let mut x2s = BTreeMap::new();
    for n in 0..=cutoff {
        for m in 0..=cutoff {
            let (nf, mf) = (n as f64, m as f64);
            let col = idx(n, m);
            let v0 = sign.value() * r * ((1.0 + q) / norm).sqrt() * q.powf(nf + 0.5) * q.powf(mf + 1.0);
            x0.insert((col, col), c(v0));
            if n < cutoff {
                let v = r * ((1.0 - q.powf(2.0 * (nf + 1.0))) / norm).sqrt() * q.powf(mf + 1.0);
                x1.insert((idx(n + 1, m), col), c(v));
            }
            if n > 0 {
                let v = r * ((1.0 - q.powf(2.0 * nf)) / norm).sqrt() * q.powf(mf + 1.0);
                x1s.insert((idx(n - 1, m), col), c(v));
            }
            if m < cutoff {
                let v = r * ((1.0 - q.powf(2.0 * (mf + 1.0))) / norm).sqrt();
                x2.insert((idx(n, m + 1), col), c(v));
            }
            if m > 0 {
                let v = r * ((1.0 - q.powf(2.0 * mf)) / norm).sqrt();
                x2s.insert((idx(n, m - 1), col), c(v));
            }
        }
    }
    let ops = [x0, x1s, x1, x2s, x2].into_iter().map(|e| SparseOp::from_map(dim, e)).collect();
    Ok(TruncatedRep { q, r, cutoff, sign, ops })
}

impl TruncatedRep {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn dim(&self) -> usize {
        (self.cutoff + 1) * (self.cutoff + 1)
    }

    /// Operator of an unscaled coordinate generator.
    pub fn op(&self, g: Generator) -> &SparseOp {
        &self.ops[g.index()]
    }

    /// Basis vectors with `n, m <= M - 2`: words of length two applied to them
    /// never reach the cutoff.
    pub fn is_interior(&self, index: usize) -> bool {
        let (n, m) = (index / (self.cutoff + 1), index % (self.cutoff + 1));
        n + 2 <= self.cutoff && m + 2 <= self.cutoff
    }

    /// Numeric factor `f_k` with `pi(t_k) = f_k pi(x_k)` for a presentation of `S^4_q`
    /// whose generators are scaled by `sigma_k` and whose radius is `R`:
    /// `f_k = sigma_k(q) sqrt(R(q)) / r`.
    fn dressing(&self, pres: &SpherePresentation) -> Result<Vec<f64>, RepError> {
        if pres.dim() != 5 {
            return Err(RepError::WrongSphere(pres.dim()));
        }
        let s = self.q.sqrt();
        let radius = pres.radius_sq().eval_real(s)?;
        let mut out = vec![0.0; 5];
        for g in pres.alphabet().generators() {
            let sigma_sq = pres.scale_sq(g.level()).expect("level has a scale").eval_real(s)?;
            out[g.index()] = (sigma_sq * radius).sqrt() / self.r;
        }
        Ok(out)
    }

    /// `pi(p)` for `p` in the scaled generators of `pres`.
    pub fn apply(&self, p: &NCPoly, pres: &SpherePresentation) -> Result<SparseOp, RepError> {
        let f = self.dressing(pres)?;
        let s = self.q.sqrt();
        let mut acc = SparseOp::zero(self.dim());
        for (w, c) in p.terms() {
            let mut coeff = c.eval_real(s)?;
            let mut term = SparseOp::identity(self.dim());
            for g in w.letters() {
                coeff *= f[g.index()];
                term = term.mul(self.op(*g));
            }
            acc = acc.add_scaled(&term, Complex64::new(coeff, 0.0));
        }
        Ok(acc)
    }

    /// `pi(E)` as a block operator on `C^k (x) H`, block `(i, j)` at rows
    /// `i*D..` and columns `j*D..`.
    pub fn apply_matrix(&self, e: &NCMatrix, pres: &SpherePresentation, exec: Execution) -> Result<SparseOp, RepError> {
        let d = self.dim();
        let k = e.rows();
        let blocks: Result<Vec<SparseOp>, RepError> = exec.map(e.entries(), |p| self.apply(p, pres)).into_iter().collect();
        let blocks = blocks?;
        let mut out = SparseOp::zero(k * d);
        for (b, op) in blocks.iter().enumerate() {
            let (bi, bj) = (b / e.cols(), b % e.cols());
            for (i, j, v) in op.nonzeros() {
                out.rows[bi * d + i].push((bj * d + j, v));
            }
        }
        for row in &mut out.rows {
            row.sort_by_key(|(j, _)| *j);
        }
        Ok(out)
    }
}

/// One labelled residual, the largest entry on interior columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepReport {
    pub residuals: Vec<Residual>,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl RepReport {
    fn from_residuals(residuals: Vec<Residual>, tol: f64) -> Self {
        let max_residual = residuals.iter().map(|r| r.value).fold(0.0, f64::max);
        RepReport { residuals, max_residual, tol, pass: max_residual <= tol }
    }
}

fn check_tol(tol: f64) -> Result<(), RepError> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(RepError::Domain(format!("tolerance {tol} must be positive")))
    }
}

/// Every defining relation of `pres`, the radius identity included, on the
/// interior block.
pub fn check_relations(rep: &TruncatedRep, pres: &SpherePresentation, tol: f64, exec: Execution) -> Result<RepReport, RepError> {
    check_tol(tol)?;
    let relations = pres.relations();
    let residuals: Result<Vec<Residual>, RepError> = exec
        .map(&relations, |(label, rel)| {
            let op = rep.apply(rel, pres)?;
            Ok(Residual { label: label.clone(), value: op.max_abs_on_columns(|j| rep.is_interior(j)) })
        })
        .into_iter()
        .collect();
    Ok(RepReport::from_residuals(residuals?, tol))
}

/// `P^2 - P` and `P* - P` for `P = pi(E)` on interior columns of every block.
pub fn check_projector(
    rep: &TruncatedRep,
    e: &NCMatrix,
    pres: &SpherePresentation,
    tol: f64,
    exec: Execution,
) -> Result<RepReport, RepError> {
    check_tol(tol)?;
    let p = rep.apply_matrix(e, pres, exec)?;
    let d = rep.dim();
    let interior = |j: usize| rep.is_interior(j % d);
    let idem = p.mul(&p).add_scaled(&p, Complex64::new(-1.0, 0.0));
    let adj = p.adjoint().add_scaled(&p, Complex64::new(-1.0, 0.0));
    let residuals = vec![
        Residual { label: "P^2 - P".into(), value: idem.max_abs_on_columns(interior) },
        Residual { label: "P* - P".into(), value: adj.max_abs_on_columns(interior) },
    ];
    Ok(RepReport::from_residuals(residuals, tol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceClassReport {
    pub q: f64,
    pub r: f64,
    pub power: u32,
    /// `sum_{n,m <= M} |pi(x0)|^p` for `M = 0..=max_cutoff`.
    pub partial_traces: Vec<f64>,
    /// Ratios of successive increments; they approach `q^p`.
    pub increment_ratios: Vec<f64>,
    /// Geometric extrapolation of the remaining sum beyond `max_cutoff`.
    pub tail: f64,
    /// `tail` divided by the last partial trace.
    pub relative_tail: f64,
    /// Largest singular value of the truncated `pi(x2)` for `M = 2..=max_cutoff`.
    pub x2_top_singular: Vec<(usize, f64)>,
    /// `r / sqrt(1 + q^3)`, the norm of the untruncated `pi(x2)`.
    pub x2_limit: f64,
}

impl TraceClassReport {
    pub fn x2_gap(&self) -> f64 {
        self.x2_top_singular.last().map_or(f64::INFINITY, |(_, v)| (v - self.x2_limit).abs())
    }
}

/// Geometric convergence of the partial traces of `|pi(x0)|^p` against the
/// non-decaying top singular value of `pi(x2)`.
pub fn trace_class_evidence(q: f64, r: f64, sign: Sign, max_cutoff: usize, power: u32) -> Result<TraceClassReport, RepError> {
    if power == 0 {
        return Err(RepError::Domain("power must be at least 1".into()));
    }
    let rep = build_rep_s4(q, r, max_cutoff, sign)?;
    let x0 = rep.op(Generator::x(0));
    let weight = |n: usize, m: usize| {
        let i = basis_index(max_cutoff, n, m);
        x0.get(i, i).norm().powi(power as i32)
    };
    let mut partial_traces = Vec::with_capacity(max_cutoff + 1);
    let mut increments = Vec::with_capacity(max_cutoff + 1);
    let mut total = 0.0;
    for cut in 0..=max_cutoff {
        // the new shell n = cut or m = cut, summed on its own to avoid cancellation
        let mut shell = weight(cut, cut);
        for k in 0..cut {
            shell += weight(cut, k) + weight(k, cut);
        }
        total += shell;
        partial_traces.push(total);
        increments.push(shell);
    }
    let increment_ratios: Vec<f64> = increments.windows(2).map(|w| w[1] / w[0]).collect();
    let ratio = *increment_ratios.last().expect("cutoff >= 2");
    let last = *increments.last().expect("nonempty");
    let tail = if ratio < 1.0 { last * ratio / (1.0 - ratio) } else { f64::INFINITY };
    let relative_tail = tail / total;

    let mut x2_top_singular = Vec::new();
    for cut in 2..=max_cutoff {
        let rep = build_rep_s4(q, r, cut, sign)?;
        x2_top_singular.push((cut, rep.op(Generator::x(2)).top_singular_value()));
    }
    Ok(TraceClassReport {
        q,
        r,
        power,
        partial_traces,
        increment_ratios,
        tail,
        relative_tail,
        x2_top_singular,
        x2_limit: r / (1.0 + q.powi(3)).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::twisted_projector;
    use crate::expr::parse_poly;
    use crate::presentations::build_sphere;

    #[test]
    fn parameter_domain() {
        assert!(build_rep_s4(1.0, 1.0, 4, Sign::Plus).is_err());
        assert!(build_rep_s4(0.5, 0.0, 4, Sign::Plus).is_err());
        assert!(build_rep_s4(0.5, 1.0, 1, Sign::Plus).is_err());
        assert_eq!(
            build_rep_s4(0.5, 1.0, 65, Sign::Plus).unwrap_err(),
            RepError::CutoffTooLarge { cutoff: 65, max: MAX_CUTOFF }
        );
        assert!(trace_class_evidence(0.5, 1.0, Sign::Plus, 10, 0).is_err());
    }

    #[test]
    fn matrix_coefficients() {
        let rep = build_rep_s4(0.5, 1.0, 6, Sign::Plus).unwrap();
        let i00 = basis_index(6, 0, 0);
        let x2 = rep.op(Generator::x(2)).get(basis_index(6, 0, 1), i00);
        assert!((x2.re - (0.75f64 / 1.125).sqrt()).abs() < 1e-15);
        let x0 = rep.op(Generator::x(0)).get(i00, i00);
        assert!((x0.re - (1.5f64 / 1.125).sqrt() * 0.5f64.powf(1.5)).abs() < 1e-15);
        // the bottom state is annihilated
        for m in 0..=6 {
            let col = basis_index(6, 0, m);
            assert_eq!(rep.op(Generator::x_star(1)).max_abs_on_columns(|j| j == col), 0.0);
        }
    }

    #[test]
    fn adjoints_are_exact() {
        let rep = build_rep_s4(0.3, 1.7, 8, Sign::Minus).unwrap();
        for k in 1..=2 {
            assert_eq!(rep.op(Generator::x(k)).adjoint(), *rep.op(Generator::x_star(k)));
        }
    }

    #[test]
    fn relations_hold_on_interior() {
        let pres = build_sphere(5).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let rep = build_rep_s4(0.5, 1.0, 10, sign).unwrap();
            let report = check_relations(&rep, &pres, 1e-12, Execution::Sequential).unwrap();
            assert!(report.pass, "{report:?}");
            let strict = check_relations(&rep, &pres, 1e-30, Execution::Sequential).unwrap();
            assert!(!strict.pass);
        }
    }

    #[test]
    fn swap_and_radius_on_interior() {
        let pres = build_sphere(5).unwrap().with_unit_scales().unwrap();
        let rep = build_rep_s4(0.5, 1.0, 8, Sign::Plus).unwrap();
        let swap = parse_poly("x1 * x2 - q x2 * x1", pres.alphabet()).unwrap();
        let op = rep.apply(&swap, &pres).unwrap();
        assert!(op.max_abs_on_columns(|j| rep.is_interior(j)) < 1e-15);
        let r2 = pres.r_squared(2).unwrap();
        let id = SparseOp::identity(rep.dim());
        let radius = pres.radius_sq().eval_real(0.5f64.sqrt()).unwrap();
        let diff = rep.apply(&r2, &pres).unwrap().add_scaled(&id, Complex64::new(-radius, 0.0));
        assert!(diff.max_abs_on_columns(|j| rep.is_interior(j)) < 1e-14);
        assert_eq!(rep.apply(&pres.one(), &pres).unwrap(), id);
    }

    #[test]
    fn projector_on_interior() {
        let pres = build_sphere(5).unwrap();
        let e = twisted_projector(&pres).unwrap();
        let rep = build_rep_s4(0.8, 1.0, 8, Sign::Minus).unwrap();
        let report = check_projector(&rep, &e, &pres, 1e-10, Execution::Sequential).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn trace_class_dichotomy() {
        let rep = trace_class_evidence(0.5, 1.0, Sign::Plus, 30, 1).unwrap();
        let last = *rep.increment_ratios.last().unwrap();
        assert!((last - 0.5).abs() < 1e-3);
        assert!(rep.tail < 1e-8);
        assert!(rep.x2_gap() < 1e-8);
        assert!(rep.x2_top_singular.windows(2).all(|w| w[1].1 >= w[0].1));
    }
}
