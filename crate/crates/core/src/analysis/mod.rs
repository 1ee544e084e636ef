//! Ground truth for the mechanisms: exhaustive privacy audits, exact and
//! Monte Carlo marginal output laws, and accuracy sweeps.

pub mod audit;
pub mod enumerate;
pub mod marginal;
pub mod sweep;

pub use audit::{audit_mechanism, audit_mechanism_capped, likelihood_ratio, AuditReport, Witness};
pub use enumerate::{
    composition_count, enumerate_count_vectors, enumerate_count_vectors_capped,
    neighbor_pair_count, neighbors, Compositions, DEFAULT_ENUMERATION_CAP,
};
pub use marginal::{
    draw_dataset, exact_marginal_output, exact_marginal_output_capped, mc_marginal_output,
    multinomial_probability, McEstimate, MC_CHUNK,
};
pub use sweep::{accuracy_sweep, sweep_to_csv, AccuracyPoint, MechanismKind, EXACT_LIMIT};
