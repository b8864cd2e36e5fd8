//! Reference computations: exact operational rates by partition enumeration,
//! relaxed rate-distortion, projected information radius via channel capacity,
//! and evaluators for the partition-sequence conditions.

pub mod brute_force;
pub mod capacity;
pub mod conditions;
pub mod families;
pub mod instance;
pub mod rate_distortion;
pub mod report;

pub use brute_force::{
    brute_force_rn, brute_force_rn_with_budget, min_entropy_dp, partition_entropy, truncation_check,
    BruteForce, TruncationCheck, BRUTE_FORCE_BUDGET,
};
pub use capacity::{projected_info_radius, CapacityProblem, CapacitySolution};
pub use conditions::{grid_block_partition, theorem2_conditions, ConditionRow};
pub use families::{disjoint_family_builder, separation_gap};
pub use instance::{FiniteInstance, InstanceDistortion};
pub use rate_distortion::{blahut_arimoto_rd, RdPoint, RdProblem, RdSolution};
pub use report::{BoundType, ReportRow};
