//! Permutation and string quivers: specifications, the companion-matrix
//! space `B(σ, s)`, Kac–Schwarz and companion normal forms, flat sections,
//! classical-limit curves and the unitary-matrix-model dictionary.

mod companion;
mod file;
mod random;
mod solve;
mod spec;

pub use companion::{
    companion_connection, companion_normal_form, k_shift_classes, leading_terms_match,
    module_connection, CompanionNormalForm, CompanionReport,
};
pub use file::{parse_quiver_file, QuiverFile, SpecFileError};
pub use random::{derive_seed, random_instance, random_valid_b, valid_degrees, MAX_RANDOM_DEGREE};
pub use solve::{
    cover_from_normal_form, moduli_cover, solve_flat_section, verify_quiver_solution, Constraint, QuiverSolution,
    SolutionReport, VerifyFailure, VerifyReport,
};
pub use spec::{
    classical_limit_curve, congruence_pattern, ks_hbar_connection, ks_normal_form, twisted_potentials,
    umm_ks_from_potential, validate_b, CompanionMatrix, Permutation, QuiverKind, QuiverSpec,
    Validation, Violation,
};

use thiserror::Error;

use crate::coeffs::CoeffError;
use crate::connections::ConnError;
use crate::levelt_turrittin::SplitError;
use crate::series::SeriesError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuiverError {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("σ = {0} is not an n-cycle")]
    NotNCycle(String),
    #[error("σ = {0} is not the string permutation (n n-1 … 1)")]
    NotStringQuiver(String),
    #[error("only p = 1 is supported here, got p = {0}")]
    UnsupportedP(u32),
    #[error("matrix is not in B(σ, s): {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidCompanion(Vec<Violation>),
    #[error("supplied f = {supplied} is not an exponential factor; classes are {classes}")]
    InconsistentPotential { supplied: String, classes: String },
    #[error("incompatible leading data: {0}")]
    IncompatibleLeading(String),
    #[error("resonance: coefficient of z^-{stage} is not determined")]
    Resonance { stage: usize },
    #[error("potential has no nonzero coefficients")]
    EmptyPotential,
    #[error("potential index {0} is even; only odd t_(2i+1) enter")]
    EvenPotentialIndex(u32),
    #[error("curve has a non-rational coefficient: {0}")]
    NonRationalCurve(String),
    #[error("split certification failed")]
    SplitNotCertified,
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Connection(#[from] ConnError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}
