//! Seeded random elements and the randomized engine checks built on them.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec::Execution;
use crate::invariants::{character, InvariantError};
use crate::ncalgebra::{AlgebraError, NCPoly, ReductionOrder, Word};
use crate::presentations::SpherePresentation;
use crate::qscalar::QScalar;

/// A small random coefficient: `c q^k` or `c s^k`, `c` in `-3..=3` nonzero.
pub fn random_scalar<R: Rng>(rng: &mut R) -> QScalar {
    let mut c = rng.gen_range(1..=3i64);
    if rng.gen_bool(0.5) {
        c = -c;
    }
    QScalar::from_int(c) * QScalar::s_pow(rng.gen_range(-3..=3))
}

/// Sum of `terms` random words of length at most `max_degree`.
pub fn random_element<R: Rng>(pres: &SpherePresentation, rng: &mut R, max_degree: usize, terms: usize) -> NCPoly {
    let gens = pres.alphabet().generators();
    let mut out = pres.zero();
    for _ in 0..terms {
        let len = rng.gen_range(0..=max_degree);
        let w: Vec<_> = (0..len).map(|_| *gens.choose(rng).expect("nonempty alphabet")).collect();
        out.add_term(Word::new(w), &random_scalar(rng));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleReport {
    pub samples: usize,
    /// Indices of failing samples with the offending difference.
    pub failures: Vec<(usize, NCPoly)>,
}

impl SampleReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Reduces each sample under two independent random rewrite orders and the
/// leftmost order; all three must agree.
pub fn confluence_sample(
    pres: &SpherePresentation,
    samples: usize,
    max_degree: usize,
    seed: u64,
    exec: Execution,
) -> Result<SampleReport, AlgebraError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items: Vec<(NCPoly, u64)> = (0..samples).map(|_| (random_element(pres, &mut rng, max_degree, 4), rng.gen())).collect();
    let rules = pres.rules();
    let outcomes = exec.map(&items, |(p, s)| -> Result<Option<NCPoly>, AlgebraError> {
        let mut r = ChaCha8Rng::seed_from_u64(*s);
        let a = rules.normal_form_with(p, ReductionOrder::Random, &mut r)?;
        let b = rules.normal_form_with(p, ReductionOrder::Random, &mut r)?;
        let c = rules.normal_form(p)?;
        if a != b {
            return Ok(Some(&a - &b));
        }
        Ok((a != c).then(|| &a - &c))
    });
    let mut failures = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        if let Some(d) = o? {
            failures.push((i, d));
        }
    }
    Ok(SampleReport { samples, failures })
}

/// `tau(nf(p q)) = tau(p) tau(q)` on random reduced pairs.
pub fn character_multiplicativity_sample(
    pres: &SpherePresentation,
    samples: usize,
    max_degree: usize,
    seed: u64,
    exec: Execution,
) -> Result<SampleReport, InvariantError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items: Vec<(NCPoly, NCPoly)> = (0..samples)
        .map(|_| (random_element(pres, &mut rng, max_degree, 3), random_element(pres, &mut rng, max_degree, 3)))
        .collect();
    let outcomes = exec.map(&items, |(p, q)| -> Result<bool, InvariantError> {
        let p = pres.normal_form(p)?;
        let q = pres.normal_form(q)?;
        let pq = pres.normal_form(&(&p * &q))?;
        Ok(character(&pq, pres)? == character(&p, pres)?.mul(&character(&q, pres)?))
    });
    let mut failures = Vec::new();
    for (i, (o, (p, q))) in outcomes.into_iter().zip(&items).enumerate() {
        if !o? {
            failures.push((i, p * q));
        }
    }
    Ok(SampleReport { samples, failures })
}

/// `nf(r^2 p - p r^2) = 0` on random elements.
pub fn centrality_sample(
    pres: &SpherePresentation,
    samples: usize,
    max_degree: usize,
    seed: u64,
) -> Result<SampleReport, AlgebraError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2 = pres.r_squared(pres.rank()).expect("top level is valid");
    let mut failures = Vec::new();
    for i in 0..samples {
        let p = random_element(pres, &mut rng, max_degree, 3);
        let d = pres.normal_form(&(&(&r2 * &p) - &(&p * &r2)))?;
        if !d.is_zero() {
            failures.push((i, d));
        }
    }
    Ok(SampleReport { samples, failures })
}
