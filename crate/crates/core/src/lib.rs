//! Exact symbolic engine and numeric checks for quantum Euclidean spheres
//! `S^{N-1}_q`: normal ordering over `Q(q^{1/2})`, projector construction and
//! verification, characters and charges, and a truncated Hilbert-space
//! representation of `S^4_q`.

pub mod bundles;
pub mod exec;
pub mod expr;
pub mod invariants;
pub mod ncalgebra;
pub mod ncmatrix;
pub mod presentations;
pub mod qscalar;
pub mod repnum;
pub mod sampling;

pub use bundles::{
    cotangent_projector, inductive_step, normal_projector, normal_vector, relations_from_projector, twisted_projector,
    verify_projection, BundleError, ProjectionReport,
};
pub use exec::Execution;
pub use expr::{parse_poly, parse_scalar, ParseError};
pub use invariants::{character, chern0_class, classical_sample_eval, monopole_charge, rank, CharacterValue, InvariantError};
pub use ncalgebra::{AlgebraError, AlgebraId, Generator, NCPoly, ReductionOrder, RuleSet, Word};
pub use ncmatrix::{MatrixError, NCMatrix};
pub use presentations::{build_sphere, parse_presentation, PresentationError, SpherePresentation};
pub use qscalar::{QScalar, ScalarError};
pub use repnum::{build_rep_s4, check_projector, check_relations, trace_class_evidence, RepError, Sign, TruncatedRep};
