use super::instance::FiniteInstance;
use crate::error::{Error, Result};
use crate::source_models::{Partition, SourcePmf};
use crate::universal_codes::BlockPartition;

pub const CAPACITY_TOLERANCE: f64 = 1e-6;
pub const CAPACITY_MAX_ITERATIONS: usize = 100_000;

/// Cell masses above this horizon are pooled into one remainder cell.
const TAIL_HORIZON_EPS: f64 = 1e-15;

/// Channel from a family index to the cells of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityProblem {
    rows: Vec<Vec<f64>>,
}

/// Channel capacity with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitySolution {
    /// Bits; the min-max divergence value within tolerance.
    pub capacity: f64,
    /// max_i D(W_i ‖ q) at the final prior.
    pub upper: f64,
    pub prior: Vec<f64>,
    /// I(index; cell) under the uniform prior.
    pub uniform_information: f64,
    pub iterations: usize,
}

impl CapacityProblem {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len() || r.is_empty()) {
            return Err(Error::ConfigInvalid("capacity rows must be nonempty and of equal length".into()));
        }
        for r in &rows {
            let s: f64 = r.iter().sum();
            if r.iter().any(|v| !v.is_finite() || *v < 0.0) || (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidPmf(format!("capacity row sums to {s}")));
            }
        }
        Ok(CapacityProblem { rows })
    }

    /// Projection of single-letter pmfs onto a symbol or tail partition.
    pub fn from_partition(family: &[SourcePmf], partition: &Partition) -> Result<Self> {
        let rows = match partition {
            Partition::Symbols(s) => family.iter().map(|p| s.masses(p)).collect(),
            Partition::Tail(t) => {
                let k = t.k();
                let horizon = family.iter().map(|p| p.horizon(TAIL_HORIZON_EPS)).max().unwrap_or(k).max(k + 1);
                family
                    .iter()
                    .map(|p| {
                        let mut row = vec![1.0 - p.mass_suffix(k + 1)];
                        row.extend((k + 1..=horizon).map(|x| p.prob(x)));
                        let listed: f64 = row.iter().sum();
                        row.push((1.0 - listed).max(0.0));
                        row
                    })
                    .collect()
            }
        };
        Self::new(normalize(rows))
    }

    /// Projection of n-fold products onto a block partition, with one remainder
    /// cell for blocks the partition does not list.
    pub fn from_block_partition(family: &[SourcePmf], partition: &BlockPartition) -> Result<Self> {
        let rows = family
            .iter()
            .map(|p| {
                let mut row: Vec<f64> = partition
                    .cells()
                    .iter()
                    .map(|c| c.iter().map(|b| b.iter().map(|&x| p.prob(x)).product::<f64>()).sum())
                    .collect();
                let listed: f64 = row.iter().sum();
                row.push((1.0 - listed).max(0.0));
                row
            })
            .collect();
        Self::new(normalize(rows))
    }

    /// Oracle instances projected onto a partition of their common block space.
    pub fn from_instances(family: &[FiniteInstance], partition: &BlockPartition) -> Result<Self> {
        let rows = family
            .iter()
            .map(|inst| {
                let blocks = inst.blocks();
                let probs: Vec<f64> = inst.block_probs().iter().map(crate::rational::big_to_f64).collect();
                let mut row: Vec<f64> = partition
                    .cells()
                    .iter()
                    .map(|c| c.iter().map(|b| blocks.binary_search(b).map_or(0.0, |i| probs[i])).sum())
                    .collect();
                let listed: f64 = row.iter().sum();
                row.push((1.0 - listed).max(0.0));
                row
            })
            .collect();
        Self::new(normalize(rows))
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// No cell carries mass from two rows.
    pub fn disjoint_support(&self) -> bool {
        (0..self.rows[0].len()).all(|j| self.rows.iter().filter(|r| r[j] > 0.0).count() <= 1)
    }
}

fn normalize(rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    rows.into_iter()
        .map(|r| {
            let s: f64 = r.iter().sum();
            r.into_iter().map(|v| v / s).collect()
        })
        .collect()
}

/// D(W_i ‖ q) in bits for every row.
fn divergences(rows: &[Vec<f64>], prior: &[f64]) -> Vec<f64> {
    let cols = rows[0].len();
    let q: Vec<f64> = (0..cols).map(|j| rows.iter().zip(prior).map(|(r, p)| p * r[j]).sum()).collect();
    rows.iter()
        .map(|r| r.iter().zip(&q).filter(|(w, _)| **w > 0.0).map(|(w, q)| w * (w / q).log2()).sum::<f64>().max(0.0))
        .collect()
}

/// Finite-subfamily information radius of the projected family, via the capacity
/// of the index-to-cell channel.
pub fn projected_info_radius(cap: &CapacityProblem) -> Result<CapacitySolution> {
    let m = cap.rows.len();
    let uniform = vec![1.0 / m as f64; m];
    let du = divergences(&cap.rows, &uniform);
    let uniform_information = du.iter().sum::<f64>() / m as f64;
    let mut prior = uniform;
    for it in 1..=CAPACITY_MAX_ITERATIONS {
        let d = divergences(&cap.rows, &prior);
        let lower = prior.iter().zip(&d).map(|(p, d)| p * d.exp2()).sum::<f64>().log2();
        let upper = d.iter().cloned().fold(0.0, f64::max);
        if upper - lower < CAPACITY_TOLERANCE {
            return Ok(CapacitySolution {
                capacity: lower.max(uniform_information).min(upper),
                upper,
                prior,
                uniform_information,
                iterations: it,
            });
        }
        let z: f64 = prior.iter().zip(&d).map(|(p, d)| p * d.exp2()).sum();
        prior = prior.iter().zip(&d).map(|(p, d)| p * d.exp2() / z).collect();
    }
    Err(Error::NonConvergence(CAPACITY_MAX_ITERATIONS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source_models::{SymbolPartition, TailPartitionIndex};
    use crate::special::plogp;

    #[test]
    fn noiseless_channels() {
        for m in [2usize, 4, 8] {
            let rows = (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
            let cap = CapacityProblem::new(rows).unwrap();
            assert!(cap.disjoint_support());
            let s = projected_info_radius(&cap).unwrap();
            assert!((s.capacity - (m as f64).log2()).abs() < 1e-6);
            assert!(s.capacity >= s.uniform_information - 1e-12);
        }
    }

    #[test]
    fn identical_rows_and_trivial_partition() {
        let mu = SourcePmf::geometric(0.5).unwrap();
        let cap = CapacityProblem::from_partition(&[mu.clone(), mu.clone()], &SymbolPartition::singletons(0, 20).into())
            .unwrap();
        assert!(projected_info_radius(&cap).unwrap().capacity.abs() < 1e-9);
        let nu = SourcePmf::uniform(0, 3);
        let cap = CapacityProblem::from_partition(&[mu, nu], &SymbolPartition::whole_space().into()).unwrap();
        assert_eq!(cap.rows()[0].len(), 1);
        assert!(projected_info_radius(&cap).unwrap().capacity.abs() < 1e-9);
    }

    #[test]
    fn binary_symmetric_channel() {
        // C = 1 − h(0.1).
        let cap = CapacityProblem::new(vec![vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let s = projected_info_radius(&cap).unwrap();
        assert!((s.capacity - (1.0 - plogp(0.1) - plogp(0.9))).abs() < 1e-6);
        assert!(!cap.disjoint_support());
    }

    #[test]
    fn z_channel_needs_nonuniform_prior() {
        // Z channel with crossover 1/2: C = log₂(5/4), reached at prior (2/5, 3/5).
        let cap = CapacityProblem::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let s = projected_info_radius(&cap).unwrap();
        assert!((s.capacity - 1.25f64.log2()).abs() < 1e-6);
        assert!((s.prior[0] - 0.6).abs() < 1e-3);
        assert!(s.capacity > s.uniform_information);
        assert!(s.upper - s.capacity < 1e-6);
    }

    #[test]
    fn tail_partition_rows() {
        let a = SourcePmf::point_mass(1);
        let b = SourcePmf::point_mass(5);
        let cap = CapacityProblem::from_partition(&[a, b], &TailPartitionIndex::new(2).unwrap().into()).unwrap();
        assert!(cap.disjoint_support());
        assert!((projected_info_radius(&cap).unwrap().capacity - 1.0).abs() < 1e-9);
    }
}
