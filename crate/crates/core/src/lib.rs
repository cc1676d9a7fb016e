//! Classification of Boolean functions against pattern-basis quantum
//! classifiers.
//!
//! A Boolean function `f: B^n -> B` is stored as its pattern bit vector
//! ([`PatternVector`]). Bases built from the elementary factors `B1` and `Q2`
//! ([`PatternBasis`]) pair one-to-one with classifiers built from `H` and `C2`
//! ([`ClassifierSpec`]). A basis member is measured as its own index with
//! certainty; any other function lands on one of its nearest basis kets with
//! probability given by the classification threshold.
//!
//! Modules:
//!
//! - [`pattern`] and [`basis`]: bit-exact vector algebra and nearest-neighbor
//!   queries.
//! - [`classifier`]: the structured transforms and a dense reference.
//! - [`experiment`]: exhaustive and sampled threshold profiles.
//! - [`game`]: Monte Carlo simulation of the nearest basis ket game.
//! - [`reference`]: embedded reference tables and cell-level diffs.

pub mod basis;
pub mod classifier;
pub mod error;
pub mod experiment;
pub mod game;
pub mod pattern;
pub mod reference;

pub use basis::{
    basis_product, class_rho, distance_from_class, validate_basis, BasisViolation, Factor,
    NearestSet, PatternBasis, Recipe,
};
pub use classifier::{
    apply_c2_factor, apply_classifier, apply_hadamard_factor, classification_threshold,
    dense_unitary, initial_amplitudes, outcome_distribution, AmplitudeVector, ClassifierSpec,
    OutcomeDistribution, ThresholdReport,
};
pub use error::{Error, Result};
pub use experiment::{
    exhaustive_profile, interval_summary, merge_profiles, probe_suite, stratified_sample_profile,
    DistanceProfile, IntervalSummary, Probe, ProfileMode,
};
pub use game::{
    alice_interval_decide, bob_pick, estimate_win_rate, play_round, AliceStrategy, BobStrategy,
    GameConfig, RoundRecord, WinRate,
};
pub use pattern::{
    enumerate_neighborhood, extended_product_eval, hamming_distance, pattern_product,
    PatternVector,
};
