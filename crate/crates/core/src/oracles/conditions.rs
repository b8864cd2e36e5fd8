use super::brute_force::{brute_force_rn, partition_entropy};
use super::capacity::{projected_info_radius, CapacityProblem};
use super::instance::FiniteInstance;
use super::report::{BoundType, ReportRow};
use crate::distortion::DistortionSpec;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::source_models::{first_violation, EnvelopeSpec, SourcePmf};
use crate::universal_codes::BlockPartition;

/// Largest partition (in blocks) projected for the radius condition.
pub const RADIUS_BLOCK_BUDGET: u128 = 1 << 16;

/// Conditions of the partition-sequence characterization at one block length.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionRow {
    pub n: usize,
    /// π_n ∈ Q_n(d), exact.
    pub covering: Result<bool>,
    /// Finite-subfamily lower bound on (1/n) R⁺(Λⁿ, σ(π_n)).
    pub radius: Result<f64>,
    /// Subfamily max of (1/n)[H_{σ(π_n)}(μⁿ) − min_π H_{σ(π)}(μⁿ)].
    pub gap: Result<f64>,
}

impl ConditionRow {
    pub fn rows(&self) -> Vec<ReportRow> {
        let inst = format!("n={}", self.n);
        let mut out = Vec::new();
        match &self.covering {
            Ok(b) => out.push(ReportRow::new(&inst, "condition_i", if *b { 1.0 } else { 0.0 }, BoundType::Exact)),
            Err(_) => out.push(ReportRow::budget_exceeded(&inst, "condition_i")),
        }
        match &self.radius {
            Ok(v) => out.push(ReportRow::new(&inst, "radius_per_sample", *v, BoundType::Lower)),
            Err(_) => out.push(ReportRow::budget_exceeded(&inst, "radius_per_sample")),
        }
        match &self.gap {
            Ok(v) => out.push(ReportRow::new(&inst, "entropy_gap_per_sample", *v, BoundType::SubfamilyMax)),
            Err(_) => out.push(ReportRow::budget_exceeded(&inst, "entropy_gap_per_sample")),
        }
        out
    }
}

fn block_length(p: &BlockPartition) -> Result<usize> {
    p.cells()
        .first()
        .and_then(|c| c.first())
        .map(Vec::len)
        .ok_or_else(|| Error::ConfigInvalid("empty partition".into()))
}

/// Sorted distinct letters used by the partition's blocks.
fn letters(p: &BlockPartition) -> Vec<u64> {
    let mut w: Vec<u64> = p.cells().iter().flatten().flatten().copied().collect();
    w.sort_unstable();
    w.dedup();
    w
}

/// Evaluates the three conditions for each supplied π_n over a finite subfamily
/// of Λ_f. The gap uses each μ restricted to the partition's letters.
pub fn theorem2_conditions(
    env: &EnvelopeSpec,
    spec: &DistortionSpec,
    d: Rational,
    partitions: &[BlockPartition],
    subfamily: &[SourcePmf],
) -> Result<Vec<ConditionRow>> {
    if subfamily.is_empty() {
        return Err(Error::ConfigInvalid("empty subfamily".into()));
    }
    for mu in subfamily {
        if let Some(x) = first_violation(env, mu)? {
            return Err(Error::EnvelopeViolation(x));
        }
    }
    partitions
        .iter()
        .map(|p| {
            let n = block_length(p)?;
            let covering = p.certify(spec, d);
            let blocks: u128 = p.cells().iter().map(|c| c.len() as u128).sum();
            let radius = if blocks > RADIUS_BLOCK_BUDGET {
                Err(Error::BudgetExceeded { needed: blocks, budget: RADIUS_BLOCK_BUDGET })
            } else {
                CapacityProblem::from_block_partition(subfamily, p)
                    .and_then(|c| projected_info_radius(&c))
                    .map(|s| s.capacity / n as f64)
            };
            let window = letters(p);
            let gap = subfamily.iter().try_fold(f64::NEG_INFINITY, |acc, mu| {
                let inst = FiniteInstance::from_pmf(mu, window.clone(), n, *spec, d)?;
                let h = partition_entropy(&inst, p)?;
                let best = brute_force_rn(&inst)?;
                Ok::<f64, Error>(acc.max((h - best.entropy) / n as f64))
            });
            Ok(ConditionRow { n, covering, radius, gap })
        })
        .collect()
}

/// Product of a letterwise grid over `window`: letter cells of width 2r+1 with
/// the middle letter as prototype, r the covering radius of d.
pub fn grid_block_partition(window: &[u64], n: usize, spec: &DistortionSpec, d: Rational) -> Result<BlockPartition> {
    if window.is_empty() || n == 0 {
        return Err(Error::ConfigInvalid("grid partition needs a window and n >= 1".into()));
    }
    let mut window = window.to_vec();
    window.sort_unstable();
    window.dedup();
    let r = spec.covering_radius(d);
    let mut letter_cells: Vec<(Vec<u64>, u64)> = Vec::new();
    for &x in &window {
        match letter_cells.last_mut() {
            Some((cell, proto)) if x <= proto.saturating_add(r) => cell.push(x),
            _ => letter_cells.push((vec![x], x.saturating_add(r))),
        }
    }
    let count = (letter_cells.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    let size = (window.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > RADIUS_BLOCK_BUDGET {
        return Err(Error::BudgetExceeded { needed: size, budget: RADIUS_BLOCK_BUDGET });
    }
    let mut cells = Vec::with_capacity(count as usize);
    let mut protos = Vec::with_capacity(count as usize);
    let l = letter_cells.len();
    for mut code in 0..count as usize {
        let mut idx = vec![0usize; n];
        for slot in idx.iter_mut().rev() {
            *slot = code % l;
            code /= l;
        }
        let mut blocks: Vec<Vec<u64>> = vec![vec![]];
        for &i in &idx {
            blocks = blocks
                .into_iter()
                .flat_map(|b| {
                    letter_cells[i].0.iter().map(move |&x| {
                        let mut nb = b.clone();
                        nb.push(x);
                        nb
                    })
                })
                .collect();
        }
        cells.push(blocks);
        protos.push(idx.iter().map(|&i| letter_cells[i].1).collect());
    }
    BlockPartition::new(cells, protos)
}
