//! Prefix codes, combinatorial indexing and the two stage codes built on them.

pub mod bits;
pub mod combinatorics;
pub mod first_stage;
pub mod partition;
pub mod prefix;
pub mod second_stage;
pub mod sfe;
pub mod types;

pub use bits::{elias_gamma_len, elias_gamma_read, elias_gamma_write, BitReader, BitWriter, Codeword};
pub use first_stage::{per_type_code, FirstStage, FirstStageMode, GridQuantizer, PerTypeCode, DEFAULT_ORACLE_BUDGET};
pub use partition::{all_blocks, entropy_of_sizes, BlockPartition};
pub use prefix::{kraft_sum, FiniteCode, KraftSum, PrefixCode};
pub use second_stage::{overflow_image, SecondStage, SecondStageMode};
pub use sfe::{sfe_code, sfe_from_probs, sfe_from_weights, CountableSfe, IndexModel, PmfModel};
pub use types::{
    enumerate_types, type_of, CompactTypeCode, TypeClassIndex, TypeIndexCode, DEFAULT_TYPE_BUDGET,
};
