//! Probability models on the nonnegative integers: explicit pmfs with analytic
//! tails, envelope families, sampling, and entropy/divergence primitives.

mod envelope;
mod info;
mod pmf;
mod sampling;

pub use envelope::{EnvelopeKind, EnvelopeSpec};
pub use info::{
    divergence, entropy, projected_divergence, projected_entropy, tail_ratio_limit,
    tail_ratio_reference, tail_ratio_series, Partition, SymbolPartition, TailPartitionIndex,
};
pub use pmf::{pmf_mass, SourcePmf, SymbolSet, Tail};
pub use sampling::{
    envelope_contains, first_violation, random_dominated_pmf, rng_from_seed, sample_block,
    Sampler,
};

