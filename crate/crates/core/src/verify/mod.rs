//! Empirical verification: corpora, norm-equivalence reports, coincidence
//! checks and the named suites run by the CLI.

mod coincidence;
mod corpus;
mod equivalence;
mod suites;

pub use coincidence::{
    coincidence_check, delta_coefficient_check, holder_floor_check, sigma1, CoincidenceResult, DeltaCheck, RatioExtremes,
};
pub use corpus::{random_coefficients, Corpus, Member, MemberKind, MemberRecipe};
pub use equivalence::{ceiling_sweep, equivalence_report, report_from_pairs, CeilingSweep, EquivalenceReport};
pub use suites::{Check, Harness, Relation, Series, SuiteResult, SUITES};
