//! Noncommutative polynomials over `Q(s)` and the normal-ordering rewrite engine.
//!
//! A [`RuleSet`] holds one rule per reducible adjacent generator pair. Every
//! replacement word is strictly smaller than the left pair in the graded word
//! order, and that order is compatible with concatenation, so any rewriting
//! sequence terminates. The engine always expands the largest pending word,
//! which lets equal words merge before they are rewritten further.

mod poly;

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::qscalar::QScalar;

pub use poly::{AlgebraId, Generator, NCPoly, Word};

/// Default cap on rule applications per reduction.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("operands belong to different presentations")]
    PresentationMismatch,
    #[error("rewrite budget of {budget} rule applications exhausted")]
    BudgetExhausted { budget: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    /// `a b -> c * b a`
    Swap,
    /// `x_i x_i* -> x_i* x_i + (lower-level terms)`
    Commutator,
    /// `x_n* x_n -> (lower-level terms)`, from fixing the radius
    SphereReduction,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::Swap => "swap",
            RuleKind::Commutator => "commutator",
            RuleKind::SphereReduction => "sphere-reduction",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteRule {
    pub kind: RuleKind,
    pub left: [Generator; 2],
    pub replacement: NCPoly,
}

impl RewriteRule {
    pub fn left_word(&self) -> Word {
        Word::new(self.left.to_vec())
    }

    /// Every replacement word must be strictly below the left pair.
    pub fn is_decreasing(&self) -> bool {
        let left = self.left_word();
        self.replacement.terms().all(|(w, _)| *w < left)
    }

    /// `left - replacement` as an element of the free algebra.
    pub fn as_relation(&self) -> NCPoly {
        let left = NCPoly::monomial(self.replacement.algebra(), QScalar::one(), self.left_word());
        &left - &self.replacement
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionOrder {
    /// Rewrite the leftmost reducible pair of each word.
    Leftmost,
    /// Rewrite a uniformly chosen reducible pair.
    Random,
}

/// Rules indexed by their left pair.
#[derive(Clone)]
pub struct RuleSet {
    algebra: AlgebraId,
    alphabet: usize,
    table: Vec<Option<usize>>,
    rules: Vec<RewriteRule>,
    budget: u64,
}

impl fmt::Debug for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RuleSet").field("rules", &self.rules).finish()
    }
}

impl PartialEq for RuleSet {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.rules.len() == other.rules.len()
            && self.rules.iter().all(|r| {
                other.rule_for(r.left[0], r.left[1]).is_some_and(|o| {
                    o.kind == r.kind && o.replacement.terms().eq(r.replacement.terms())
                })
            })
    }
}

impl RuleSet {
    /// `alphabet` is one more than the largest generator index in use.
    pub fn new(algebra: AlgebraId, alphabet: usize) -> Self {
        RuleSet { algebra, alphabet, table: vec![None; alphabet * alphabet], rules: Vec::new(), budget: DEFAULT_BUDGET }
    }

    pub fn algebra(&self) -> AlgebraId {
        self.algebra
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn set_budget(&mut self, budget: u64) {
        self.budget = budget;
    }

    /// Adds or replaces the rule for its left pair.
    pub fn insert(&mut self, rule: RewriteRule) {
        let slot = self.slot(rule.left[0], rule.left[1]);
        match self.table[slot] {
            Some(i) => self.rules[i] = rule,
            None => {
                self.table[slot] = Some(self.rules.len());
                self.rules.push(rule);
            }
        }
    }

    fn slot(&self, a: Generator, b: Generator) -> usize {
        a.index() * self.alphabet + b.index()
    }

    pub fn rule_for(&self, a: Generator, b: Generator) -> Option<&RewriteRule> {
        if a.index() >= self.alphabet || b.index() >= self.alphabet {
            return None;
        }
        self.table[self.slot(a, b)].map(|i| &self.rules[i])
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    /// Positions `p` where `w[p] w[p+1]` is a left side.
    fn reducible_positions(&self, w: &Word, out: &mut Vec<usize>) {
        out.clear();
        let l = w.letters();
        for p in 0..l.len().saturating_sub(1) {
            if self.table[self.slot(l[p], l[p + 1])].is_some() {
                out.push(p);
            }
        }
    }

    fn first_reducible(&self, w: &Word) -> Option<usize> {
        let l = w.letters();
        (0..l.len().saturating_sub(1)).find(|&p| self.table[self.slot(l[p], l[p + 1])].is_some())
    }

    pub fn is_normal_word(&self, w: &Word) -> bool {
        self.first_reducible(w).is_none()
    }

    /// Leftmost-first reduction to the unique normal form.
    pub fn normal_form(&self, p: &NCPoly) -> Result<NCPoly, AlgebraError> {
        self.reduce_impl(p, |w, _| self.first_reducible(w))
    }

    /// Reduction with a caller-chosen order; the result must not depend on it.
    pub fn normal_form_with<R: Rng>(&self, p: &NCPoly, order: ReductionOrder, rng: &mut R) -> Result<NCPoly, AlgebraError> {
        match order {
            ReductionOrder::Leftmost => self.normal_form(p),
            ReductionOrder::Random => {
                let mut buf = Vec::new();
                self.reduce_impl(p, |w, _| {
                    self.reducible_positions(w, &mut buf);
                    (!buf.is_empty()).then(|| buf[rng.gen_range(0..buf.len())])
                })
            }
        }
    }

    /// Applies the rule at `pos` once, with no further reduction.
    pub fn rewrite_at(&self, w: &Word, pos: usize) -> Option<NCPoly> {
        let l = w.letters();
        let rule = self.rule_for(*l.get(pos)?, *l.get(pos + 1)?)?;
        let mut out = NCPoly::zero(self.algebra);
        for (rw, rc) in rule.replacement.terms() {
            out.add_term(splice(w, pos, rw), rc);
        }
        Some(out)
    }

    fn reduce_impl<F>(&self, p: &NCPoly, mut choose: F) -> Result<NCPoly, AlgebraError>
    where
        F: FnMut(&Word, &QScalar) -> Option<usize>,
    {
        if p.algebra() != self.algebra {
            return Err(AlgebraError::PresentationMismatch);
        }
        let mut pending: BTreeMap<Word, QScalar> = p.clone().into_terms();
        let mut done: Vec<(Word, QScalar)> = Vec::new();
        let mut steps = 0u64;
        // the largest pending word can never be produced again by rewriting
        // smaller ones, so it is final once it is irreducible
        while let Some((w, c)) = pending.pop_last() {
            let Some(pos) = choose(&w, &c) else {
                done.push((w, c));
                continue;
            };
            steps += 1;
            if steps > self.budget {
                return Err(AlgebraError::BudgetExhausted { budget: self.budget });
            }
            let l = w.letters();
            let rule = self.rule_for(l[pos], l[pos + 1]).expect("chosen position is reducible");
            for (rw, rc) in rule.replacement.terms() {
                let nw = splice(&w, pos, rw);
                let nc = &c * rc;
                match pending.entry(nw) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(nc);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let sum = e.get() + &nc;
                        if sum.is_zero() {
                            e.remove();
                        } else {
                            *e.get_mut() = sum;
                        }
                    }
                }
            }
        }
        Ok(NCPoly::from_terms(self.algebra, done))
    }

    /// `normal_form(p) == 0`, with the surviving terms as witness.
    pub fn is_zero_mod_relations(&self, p: &NCPoly) -> Result<ZeroCheck, AlgebraError> {
        let witness = self.normal_form(p)?;
        Ok(ZeroCheck { is_zero: witness.is_zero(), witness })
    }

    /// Every overlap `a b c` where both `a b` and `b c` are left sides.
    pub fn critical_pairs(&self) -> Vec<[Generator; 3]> {
        let gens: Vec<Generator> = (0..self.alphabet).map(Generator::from_index).collect();
        let mut out = Vec::new();
        for &a in &gens {
            for &b in &gens {
                if self.rule_for(a, b).is_none() {
                    continue;
                }
                for &c in &gens {
                    if self.rule_for(b, c).is_some() {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }

    /// Resolves one overlap both ways; `None` when the two normal forms agree,
    /// otherwise their difference.
    pub fn check_critical_pair(&self, triple: [Generator; 3]) -> Result<Option<NCPoly>, AlgebraError> {
        let w = Word::new(triple.to_vec());
        let left = self.rewrite_at(&w, 0).expect("left overlap reducible");
        let right = self.rewrite_at(&w, 1).expect("right overlap reducible");
        let diff = self.normal_form(&(&left - &right))?;
        Ok((!diff.is_zero()).then_some(diff))
    }
}

fn splice(w: &Word, pos: usize, middle: &Word) -> Word {
    let l = w.letters();
    let mut v = Vec::with_capacity(l.len() + middle.len());
    v.extend_from_slice(&l[..pos]);
    v.extend_from_slice(middle.letters());
    v.extend_from_slice(&l[pos + 2..]);
    Word::new(v)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroCheck {
    pub is_zero: bool,
    pub witness: NCPoly,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(id: AlgebraId, level: usize, starred: bool) -> NCPoly {
        NCPoly::generator(id, Generator::new(level, starred))
    }

    #[test]
    fn generator_order_and_star() {
        let order = [Generator::x(0), Generator::x_star(1), Generator::x(1), Generator::x_star(2), Generator::x(2)];
        assert!(order.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(Generator::x(3).star(), Generator::x_star(3));
        assert_eq!(Generator::x(0).star(), Generator::x(0));
        assert_eq!(Generator::x_star(2).level(), 2);
    }

    #[test]
    fn unit_law_and_free_product() {
        let id = AlgebraId::fresh();
        let p = &gen(id, 1, false) + &gen(id, 2, true).scale(&QScalar::q());
        assert_eq!(&NCPoly::one(id) * &p, p);
        let prod = &gen(id, 1, false) * &gen(id, 2, false);
        assert_eq!(prod.term_count(), 1);
        assert!(prod.coeff(&Word::new(vec![Generator::x(1), Generator::x(2)])).is_one());
        assert!((&p + &p.scale(&QScalar::from_int(-1))).is_zero());
    }

    #[test]
    fn mixed_algebras_rejected() {
        let a = NCPoly::one(AlgebraId::fresh());
        let b = NCPoly::one(AlgebraId::fresh());
        assert_eq!(a.checked_add(&b), Err(AlgebraError::PresentationMismatch));
        assert_eq!(a.checked_mul(&b), Err(AlgebraError::PresentationMismatch));
    }

    #[test]
    fn star_is_antihomomorphic_involution() {
        let id = AlgebraId::fresh();
        let x1 = gen(id, 1, false);
        let x2 = gen(id, 2, false);
        let s = (&x1 * &x2).star();
        assert_eq!(s, &gen(id, 2, true) * &gen(id, 1, true));
        assert_eq!(gen(id, 0, false).star(), gen(id, 0, false));
        let c = QScalar::q_pow(3);
        assert_eq!(x1.scale(&c).star(), gen(id, 1, true).scale(&c));
        assert_eq!(s.star(), &x1 * &x2);
    }

    #[test]
    fn reduced_class_drops_constant() {
        let id = AlgebraId::fresh();
        assert!(NCPoly::constant(id, QScalar::from_int(2)).reduced_class().is_zero());
        let t0 = gen(id, 0, false).scale(&QScalar::q());
        assert_eq!((&NCPoly::one(id) + &t0).reduced_class(), t0);
    }

    #[test]
    fn budget_guard_fires() {
        let id = AlgebraId::fresh();
        let mut rules = RuleSet::new(id, 3);
        rules.insert(RewriteRule {
            kind: RuleKind::Swap,
            left: [Generator::x(1), Generator::x_star(1)],
            replacement: NCPoly::monomial(id, QScalar::one(), Word::new(vec![Generator::x_star(1), Generator::x(1)])),
        });
        rules.set_budget(3);
        let w = gen(id, 1, false).pow(3);
        let p = &w * &gen(id, 1, true).pow(3);
        assert_eq!(rules.normal_form(&p), Err(AlgebraError::BudgetExhausted { budget: 3 }));
    }

    #[test]
    fn word_order_is_graded() {
        let a = Word::new(vec![Generator::x(2)]);
        let b = Word::new(vec![Generator::x(0), Generator::x(0)]);
        assert!(a < b);
        assert_eq!(Word::new(vec![Generator::x(2), Generator::x(1), Generator::x(0)]).inversions(), 3);
    }
}
