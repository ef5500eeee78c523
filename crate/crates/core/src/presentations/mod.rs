//! Sphere presentations: rho data, metric, generator scales, rewrite rules and
//! the fixed radius.
//!
//! The generators of a presentation are the *scaled* generators
//! `t_i = sigma_i x_i`, where `x_i` are the starred-form coordinates and
//! `sigma_i^2` is stored in `scale_sq`. Only squares of scales are ever needed,
//! so all relations live over `Q(s)`.

mod text;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ncalgebra::{AlgebraError, AlgebraId, Generator, NCPoly, RewriteRule, RuleKind, RuleSet, Word, ZeroCheck};
use crate::qscalar::{QScalar, ScalarError};

pub use text::{parse_presentation, S3Q_PRESENTATION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("sphere dimension parameter N = {0} is out of range (need N >= 3)")]
    Domain(usize),
    #[error("invalid level {level} for N = {dim}")]
    InvalidLevel { level: usize, dim: usize },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("rule `{rule}`: {message}")]
    Semantic { rule: String, message: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Generator set of a presentation: `x1..xn` and their stars, plus `x0` for odd N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    pub algebra: AlgebraId,
    pub rank: usize,
    pub has_x0: bool,
}

impl Alphabet {
    pub fn for_dim(dim: usize) -> Self {
        Alphabet { algebra: AlgebraId::fresh(), rank: dim / 2, has_x0: dim % 2 == 1 }
    }

    pub fn contains(&self, g: Generator) -> bool {
        let level = g.level();
        if level == 0 {
            self.has_x0
        } else {
            level <= self.rank
        }
    }

    /// Exclusive upper bound on generator indices.
    pub fn index_bound(&self) -> usize {
        2 * self.rank + 1
    }

    pub fn generators(&self) -> Vec<Generator> {
        (0..self.index_bound()).map(Generator::from_index).filter(|g| self.contains(*g)).collect()
    }

    pub fn levels(&self) -> impl Iterator<Item = usize> {
        let start = if self.has_x0 { 0 } else { 1 };
        start..=self.rank
    }
}

/// Raw ingredients of a presentation, before rules are derived.
#[derive(Debug, Clone)]
pub struct PresentationParts {
    pub name: String,
    pub dim: usize,
    pub scale_sq: BTreeMap<usize, QScalar>,
    /// `(a, b) -> c` means `a b -> c * b a`.
    pub swaps: BTreeMap<(Generator, Generator), QScalar>,
    /// Level `i` maps to `P_i` in `x_i x_i* -> x_i* x_i + P_i`.
    pub commutators: BTreeMap<usize, NCPoly>,
    pub radius_sq: QScalar,
}

#[derive(Debug, Clone)]
pub struct SpherePresentation {
    name: String,
    dim: usize,
    alphabet: Alphabet,
    rho_twice: BTreeMap<i32, i32>,
    scale_sq: BTreeMap<usize, QScalar>,
    radius_sq: QScalar,
    commutators: BTreeMap<usize, NCPoly>,
    rules: RuleSet,
}

/// Structural equality; the algebra identity tag is ignored.
impl PartialEq for SpherePresentation {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.dim == other.dim
            && self.rho_twice == other.rho_twice
            && self.scale_sq == other.scale_sq
            && self.radius_sq == other.radius_sq
            && self.commutators.len() == other.commutators.len()
            && self.commutators.iter().zip(&other.commutators).all(|((a, p), (b, r))| a == b && p.terms().eq(r.terms()))
            && self.rules == other.rules
    }
}

/// `2 rho_i` for every signed index `i`, in the layout `(n-1/2, ..., 1/2, 0, -1/2, ...)`
/// (odd N) or `(n-1, ..., 0, 0, ..., 1-n)` (even N) running over `i = -n..n`.
pub fn rho_twice(dim: usize) -> BTreeMap<i32, i32> {
    let n = (dim / 2) as i32;
    let mut out = BTreeMap::new();
    for k in 1..=n {
        let v = if dim % 2 == 1 { 2 * k - 1 } else { 2 * k - 2 };
        out.insert(-k, v);
        out.insert(k, -v);
    }
    if dim % 2 == 1 {
        out.insert(0, 0);
    }
    out
}

/// The sphere `S^{N-1}_q` at its standard normalization.
///
/// Odd `N = 2n+1`: `sigma_0^2 = 1`, `sigma_k^2 = 1+q`, `r^2 = (1+q^{2n-1})/(1+q)`.
/// Even `N = 2n`: every `sigma^2 = 1`, `r^2 = 1+q^{2n-2}`.
/// Both reproduce the unit-radius choices made for `N = 3..6` and are fixed
/// points of the inductive projector step.
pub fn build_sphere(dim: usize) -> Result<SpherePresentation, PresentationError> {
    if dim < 3 {
        return Err(PresentationError::Domain(dim));
    }
    let alphabet = Alphabet::for_dim(dim);
    let n = alphabet.rank;
    let odd = alphabet.has_x0;
    let one = QScalar::one();
    let q = QScalar::q();

    let mut scale_sq = BTreeMap::new();
    if odd {
        scale_sq.insert(0, one.clone());
    }
    for k in 1..=n {
        scale_sq.insert(k, if odd { &one + &q } else { one.clone() });
    }
    let radius_sq = if odd {
        (&one + &QScalar::q_pow(2 * n as i32 - 1)).checked_div(&(&one + &q))?
    } else {
        &one + &QScalar::q_pow(2 * n as i32 - 2)
    };

    let mut swaps = BTreeMap::new();
    let gens = alphabet.generators();
    for &a in &gens {
        for &b in &gens {
            if a <= b || a.level() == b.level() {
                continue;
            }
            // a sits at the higher level; b is lower
            let coeff = if a.is_starred() { q.clone() } else { QScalar::q_pow(-1) };
            swaps.insert((a, b), coeff);
        }
    }

    let rho = rho_twice(dim);
    let weight = |k: usize| QScalar::s_pow(-2 * rho[&(k as i32)]);
    let mut commutators = BTreeMap::new();
    for i in 1..=n {
        let sigma_i = &scale_sq[&i];
        let p = if i == 1 {
            if odd {
                // [x1, x1*] = (1 - q^-1) x0^2
                let c = &(sigma_i * &(&one - &QScalar::q_pow(-1))) * &scale_sq[&0].inv()?;
                NCPoly::monomial(alphabet.algebra, c, Word::new(vec![Generator::x(0), Generator::x(0)]))
            } else {
                NCPoly::zero(alphabet.algebra)
            }
        } else {
            // [x_i, x_i*] = (1 - q^-2) / (1 + q^{-2 rho_{i-1}}) r^2_{i-1}
            let c = (&one - &QScalar::q_pow(-2)).checked_div(&(&one + &weight(i - 1)))?;
            radius_part(&alphabet, &scale_sq, &rho, i - 1)?.scale(&(sigma_i * &c))
        };
        commutators.insert(i, p);
    }

    let parts = PresentationParts {
        name: format!("S{}_q", dim - 1),
        dim,
        scale_sq,
        swaps,
        commutators,
        radius_sq,
    };
    SpherePresentation::from_parts(alphabet, parts)
}

/// `r^2_i = sum_{k<=i} (q^{-2 rho_k} x_k x_k* + x_k* x_k) [+ x0^2]` written in the
/// scaled generators.
fn radius_part(
    alphabet: &Alphabet,
    scale_sq: &BTreeMap<usize, QScalar>,
    rho: &BTreeMap<i32, i32>,
    level: usize,
) -> Result<NCPoly, ScalarError> {
    let id = alphabet.algebra;
    let mut out = NCPoly::zero(id);
    if alphabet.has_x0 {
        let c = scale_sq[&0].inv()?;
        out.add_term(Word::new(vec![Generator::x(0), Generator::x(0)]), &c);
    }
    for k in 1..=level {
        let inv = scale_sq[&k].inv()?;
        let w = QScalar::s_pow(-2 * rho[&(k as i32)]);
        out.add_term(Word::new(vec![Generator::x(k), Generator::x_star(k)]), &(&w * &inv));
        out.add_term(Word::new(vec![Generator::x_star(k), Generator::x(k)]), &inv);
    }
    Ok(out)
}

impl SpherePresentation {
    /// Validates the parts and derives the normalized rule set, including the
    /// sphere-reduction rule for `x_n* x_n`.
    pub fn from_parts(alphabet: Alphabet, parts: PresentationParts) -> Result<Self, PresentationError> {
        let PresentationParts { name, dim, mut scale_sq, swaps, commutators, radius_sq } = parts;
        if dim < 3 {
            return Err(PresentationError::Domain(dim));
        }
        if alphabet.rank != dim / 2 || alphabet.has_x0 != (dim % 2 == 1) {
            return Err(PresentationError::Semantic { rule: "N".into(), message: "alphabet does not match N".into() });
        }
        let id = alphabet.algebra;
        let n = alphabet.rank;
        for level in alphabet.levels() {
            let s = scale_sq.entry(level).or_insert_with(QScalar::one);
            if s.is_zero() {
                return Err(PresentationError::Semantic { rule: format!("scale {level}"), message: "scale must be nonzero".into() });
            }
        }
        if let Some(&level) = scale_sq.keys().find(|&&l| !alphabet.levels().any(|m| m == l)) {
            return Err(PresentationError::InvalidLevel { level, dim });
        }
        if radius_sq.is_zero() {
            return Err(PresentationError::Semantic { rule: "radius".into(), message: "radius must be nonzero".into() });
        }

        let mut rules = RuleSet::new(id, alphabet.index_bound());
        let gens = alphabet.generators();
        for (&(a, b), c) in &swaps {
            let label = format!("swap {a} {b}");
            if !alphabet.contains(a) || !alphabet.contains(b) {
                return Err(PresentationError::Semantic { rule: label, message: "unknown generator".into() });
            }
            if a.level() == b.level() {
                return Err(PresentationError::Semantic { rule: label, message: "same-level pairs are commutator rules".into() });
            }
            if a <= b {
                return Err(PresentationError::Semantic {
                    rule: label,
                    message: "left pair is already ordered; the rule would not decrease the word".into(),
                });
            }
            if c.is_zero() {
                return Err(PresentationError::Semantic { rule: label, message: "zero swap coefficient".into() });
            }
            rules.insert(RewriteRule {
                kind: RuleKind::Swap,
                left: [a, b],
                replacement: NCPoly::monomial(id, c.clone(), Word::new(vec![b, a])),
            });
        }
        for &a in &gens {
            for &b in &gens {
                if a > b && a.level() != b.level() && !swaps.contains_key(&(a, b)) {
                    return Err(PresentationError::Semantic {
                        rule: format!("swap {a} {b}"),
                        message: "missing swap rule for an out-of-order pair".into(),
                    });
                }
            }
        }

        let mut normalized = BTreeMap::new();
        for level in 1..=n {
            let label = format!("commutator {level}");
            let p = commutators.get(&level).ok_or_else(|| PresentationError::Semantic {
                rule: label.clone(),
                message: "missing commutator rule".into(),
            })?;
            if p.algebra() != id {
                return Err(AlgebraError::PresentationMismatch.into());
            }
            if p.terms().any(|(w, _)| w.max_level() >= level) {
                return Err(PresentationError::Semantic {
                    rule: label,
                    message: format!("replacement must only use generators below level {level}"),
                });
            }
            let p = rules.normal_form(p)?;
            let x = Generator::x(level);
            let xs = Generator::x_star(level);
            let mut replacement = p.clone();
            replacement.add_term(Word::new(vec![xs, x]), &QScalar::one());
            rules.insert(RewriteRule { kind: RuleKind::Commutator, left: [x, xs], replacement });
            normalized.insert(level, p);
        }
        if let Some(&extra) = commutators.keys().find(|&&l| l == 0 || l > n) {
            return Err(PresentationError::InvalidLevel { level: extra, dim });
        }

        let rho = rho_twice(dim);
        // r^2 = (1 + w_n)/sigma_n^2 t_n* t_n + w_n/sigma_n^2 P_n + r^2_{n-1}
        let w_n = QScalar::s_pow(-2 * rho[&(n as i32)]);
        let sigma_n = &scale_sq[&n];
        let lower = radius_part(&alphabet, &scale_sq, &rho, n - 1)?;
        let mut rhs = NCPoly::constant(id, radius_sq.clone());
        rhs = &rhs - &lower;
        rhs = &rhs - &normalized[&n].scale(&w_n.checked_div(sigma_n)?);
        let factor = sigma_n.checked_div(&(&QScalar::one() + &w_n))?;
        let replacement = rules.normal_form(&rhs.scale(&factor))?;
        rules.insert(RewriteRule {
            kind: RuleKind::SphereReduction,
            left: [Generator::x_star(n), Generator::x(n)],
            replacement,
        });

        if let Some(bad) = rules.rules().iter().find(|r| !r.is_decreasing()) {
            return Err(PresentationError::Semantic {
                rule: format!("{} {} {}", bad.kind, bad.left[0], bad.left[1]),
                message: "replacement does not decrease the word order".into(),
            });
        }

        Ok(SpherePresentation { name, dim, alphabet, rho_twice: rho, scale_sq, radius_sq, commutators: normalized, rules })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `N`, the number of coordinate generators.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `n = floor(N/2)`, the top level.
    pub fn rank(&self) -> usize {
        self.alphabet.rank
    }

    pub fn has_x0(&self) -> bool {
        self.alphabet.has_x0
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn algebra(&self) -> AlgebraId {
        self.alphabet.algebra
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn radius_sq(&self) -> &QScalar {
        &self.radius_sq
    }

    pub fn scale_sq(&self, level: usize) -> Option<&QScalar> {
        self.scale_sq.get(&level)
    }

    pub fn scales(&self) -> &BTreeMap<usize, QScalar> {
        &self.scale_sq
    }

    /// `P_i` of the commutator rule at `level`, in normal form.
    pub fn commutator(&self, level: usize) -> Option<&NCPoly> {
        self.commutators.get(&level)
    }

    /// `2 rho_i` over signed indices.
    pub fn rho_twice(&self) -> &BTreeMap<i32, i32> {
        &self.rho_twice
    }

    /// `rho_i` as a rational (half-integer).
    pub fn rho(&self, index: i32) -> Option<num_rational::Ratio<i32>> {
        self.rho_twice.get(&index).map(|&r| num_rational::Ratio::new(r, 2))
    }

    /// Antidiagonal metric coefficient `g_{i,-i} = q^{-rho_i}`.
    pub fn metric_diag(&self, index: i32) -> Option<QScalar> {
        self.rho_twice.get(&index).map(|&r| QScalar::s_pow(-r))
    }

    /// `q^{-2 rho_k}` for a positive level `k`.
    pub fn weight(&self, level: usize) -> QScalar {
        QScalar::s_pow(-2 * self.rho_twice[&(level as i32)])
    }

    pub fn set_budget(&mut self, budget: u64) {
        self.rules.set_budget(budget);
    }

    pub fn zero(&self) -> NCPoly {
        NCPoly::zero(self.algebra())
    }

    pub fn one(&self) -> NCPoly {
        NCPoly::one(self.algebra())
    }

    pub fn scalar(&self, c: QScalar) -> NCPoly {
        NCPoly::constant(self.algebra(), c)
    }

    /// Scaled generator `t_level` (or its star).
    pub fn gen(&self, level: usize, starred: bool) -> NCPoly {
        let g = Generator::new(level, starred);
        assert!(self.alphabet.contains(g), "generator {g} not in {}", self.name);
        NCPoly::generator(self.algebra(), g)
    }

    pub fn normal_form(&self, p: &NCPoly) -> Result<NCPoly, AlgebraError> {
        self.rules.normal_form(p)
    }

    pub fn is_zero_mod_relations(&self, p: &NCPoly) -> Result<ZeroCheck, AlgebraError> {
        self.rules.is_zero_mod_relations(p)
    }

    /// `r^2_i` in starred form, written in the scaled generators, unreduced.
    pub fn r_squared(&self, level: usize) -> Result<NCPoly, PresentationError> {
        let valid = if self.has_x0() { level <= self.rank() } else { (1..=self.rank()).contains(&level) };
        if !valid {
            return Err(PresentationError::InvalidLevel { level, dim: self.dim });
        }
        Ok(radius_part(&self.alphabet, &self.scale_sq, &self.rho_twice, level)?)
    }

    /// Every defining relation as a free-algebra element that must vanish:
    /// swaps, commutators and the fixed radius.
    pub fn relations(&self) -> Vec<(String, NCPoly)> {
        let mut out = Vec::new();
        for rule in self.rules.rules() {
            match rule.kind {
                RuleKind::Swap => out.push((format!("swap {} {}", rule.left[0], rule.left[1]), rule.as_relation())),
                RuleKind::Commutator => {
                    out.push((format!("commutator {}", rule.left[0].level()), rule.as_relation()))
                }
                RuleKind::SphereReduction => {}
            }
        }
        let radius = self.r_squared(self.rank()).expect("top level is valid");
        out.push(("radius".into(), &radius - &self.scalar(self.radius_sq.clone())));
        out
    }

    /// The same algebra on generators rescaled to new `sigma^2` values.
    ///
    /// Fails when a commutator word picks up a scale ratio that is not a square in `Q(s)`.
    pub fn rescaled(&self, scale_sq: BTreeMap<usize, QScalar>, name: String) -> Result<Self, PresentationError> {
        let alphabet = Alphabet { algebra: AlgebraId::fresh(), ..self.alphabet };
        let mut full = BTreeMap::new();
        for level in alphabet.levels() {
            full.insert(level, scale_sq.get(&level).cloned().unwrap_or_else(QScalar::one));
        }
        // t_old = r t_new with r^2 = sigma_old^2 / sigma_new^2
        let ratio_sq = |level: usize| -> Result<QScalar, ScalarError> { self.scale_sq[&level].checked_div(&full[&level]) };
        let mut commutators = BTreeMap::new();
        for (&level, p) in &self.commutators {
            let mut out = NCPoly::zero(alphabet.algebra);
            for (w, c) in p.terms() {
                let mut sq = QScalar::one();
                for g in w.letters() {
                    sq = &sq * &ratio_sq(g.level())?;
                }
                let root = sq.sqrt_exact().ok_or_else(|| PresentationError::Semantic {
                    rule: format!("commutator {level}"),
                    message: "rescaling leaves a radical coefficient".into(),
                })?;
                out.add_term(w.clone(), &(c * &root.checked_div(&ratio_sq(level)?)?));
            }
            commutators.insert(level, out);
        }
        let mut swaps = BTreeMap::new();
        for rule in self.rules.rules().iter().filter(|r| r.kind == RuleKind::Swap) {
            let (_, c) = rule.replacement.terms().next().expect("swap rule has one term");
            swaps.insert((rule.left[0], rule.left[1]), c.clone());
        }
        let parts = PresentationParts { name, dim: self.dim, scale_sq: full, swaps, commutators, radius_sq: self.radius_sq.clone() };
        let mut out = Self::from_parts(alphabet, parts)?;
        out.set_budget(self.rules.budget());
        Ok(out)
    }

    /// The same algebra on the unscaled coordinates `x_i`.
    pub fn with_unit_scales(&self) -> Result<Self, PresentationError> {
        self.rescaled(BTreeMap::new(), format!("{}/unit", self.name))
    }

    /// Serialized in the line-oriented presentation format.
    pub fn to_text(&self) -> String {
        text::write_presentation(self)
    }

    pub(crate) fn swap_coefficients(&self) -> Vec<((Generator, Generator), QScalar)> {
        self.rules
            .rules()
            .iter()
            .filter(|r| r.kind == RuleKind::Swap)
            .map(|r| ((r.left[0], r.left[1]), r.replacement.terms().next().expect("one term").1.clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests;
