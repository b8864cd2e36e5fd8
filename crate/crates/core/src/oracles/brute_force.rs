use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;

use super::instance::FiniteInstance;
use crate::error::{Error, Result};
use crate::rational::ratio_to_f64;
use crate::special::plogp;
use crate::universal_codes::BlockPartition;

/// Largest block space searched by set-partition enumeration.
pub const BRUTE_FORCE_BUDGET: u128 = 12;

/// Hard ceiling for caller-supplied budgets (mask tables have 2^N entries).
const MAX_POINTS: u128 = 20;

/// Minimum-entropy d-covering partition of a finite block space.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    /// Bits per sample.
    pub rate: f64,
    /// Bits per block.
    pub entropy: f64,
    pub partition: BlockPartition,
    /// Restricted-growth string of the witness over the lexicographic block order.
    pub rgs: Vec<usize>,
    /// Exact cell masses, ascending.
    pub cell_masses: Vec<BigRational>,
}

/// Tables shared by the enumeration and the dynamic-programming cross-check.
struct Tables {
    npts: usize,
    blocks: Vec<Vec<u64>>,
    /// covers[i]: prototypes y with ρ_n(b_i, y) ≤ d.
    covers: Vec<u64>,
    /// covered_by[y]: members i with ρ_n(b_i, y) ≤ d.
    covered_by: Vec<u64>,
    weights: Vec<BigUint>,
    total: BigUint,
    /// Entropy term −m log m of every cell mask.
    term: Vec<f64>,
    /// Position of every cell mask in the exact order of cell masses.
    rank: Vec<u32>,
}

impl Tables {
    fn build(inst: &FiniteInstance, budget: u128) -> Result<Self> {
        let budget = budget.min(MAX_POINTS);
        let needed = inst.block_space_size();
        if needed > budget {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        let blocks = inst.blocks();
        let npts = blocks.len();
        let dist = inst.distortion();
        let mut covers = vec![0u64; npts];
        let mut covered_by = vec![0u64; npts];
        for (i, x) in blocks.iter().enumerate() {
            for (j, y) in blocks.iter().enumerate() {
                if dist.rho_block(x, y)? <= inst.d() {
                    covers[i] |= 1 << j;
                    covered_by[j] |= 1 << i;
                }
            }
        }
        let (weights, total) = inst.block_weights();
        let mut cell = vec![BigUint::default(); 1 << npts];
        for mask in 1usize..cell.len() {
            let low = mask.trailing_zeros() as usize;
            cell[mask] = &cell[mask & (mask - 1)] + &weights[low];
        }
        let term = cell.iter().map(|w| plogp(ratio_to_f64(w, &total))).collect();
        let mut order: Vec<usize> = (0..cell.len()).collect();
        order.sort_by(|&a, &b| cell[a].cmp(&cell[b]));
        let mut rank = vec![0u32; cell.len()];
        let mut r = 0u32;
        for (pos, &m) in order.iter().enumerate() {
            if pos > 0 && cell[m] != cell[order[pos - 1]] {
                r += 1;
            }
            rank[m] = r;
        }
        Ok(Tables { npts, blocks, covers, covered_by, weights, total, term, rank })
    }

    /// Entropy of a set of cell masks, summed in ascending order of exact mass.
    fn canonical_entropy(&self, masks: &mut [u64]) -> f64 {
        masks.sort_by_key(|&m| self.rank[m as usize]);
        masks.iter().map(|&m| self.term[m as usize]).sum()
    }

    fn mass(&self, mask: u64) -> BigRational {
        let w: BigUint = (0..self.npts).filter(|i| mask >> i & 1 == 1).map(|i| &self.weights[i]).sum();
        BigRational::new(BigInt::from(w), BigInt::from(self.total.clone()))
    }
}

struct Search<'a> {
    t: &'a Tables,
    cells: Vec<(u64, u64)>,
    assign: Vec<usize>,
    best: f64,
    best_rgs: Vec<usize>,
    best_cells: Vec<(u64, u64)>,
    scratch: Vec<u64>,
}

impl Search<'_> {
    fn run(&mut self, i: usize) {
        let t = self.t;
        if i == t.npts {
            self.scratch.clear();
            self.scratch.extend(self.cells.iter().map(|c| c.0));
            let mut masks = std::mem::take(&mut self.scratch);
            let h = t.canonical_entropy(&mut masks);
            self.scratch = masks;
            if h < self.best {
                self.best = h;
                self.best_rgs.clone_from(&self.assign);
                self.best_cells.clone_from(&self.cells);
            }
            return;
        }
        let bit = 1u64 << i;
        let later = !((bit << 1) - 1);
        for c in 0..self.cells.len() {
            let (m, cand) = self.cells[c];
            let nm = m | bit;
            let nc = cand & t.covers[i] & (nm | later);
            if nc != 0 {
                self.cells[c] = (nm, nc);
                self.assign[i] = c;
                self.run(i + 1);
                self.cells[c] = (m, cand);
            }
        }
        let cand = t.covers[i] & (bit | later);
        if cand != 0 {
            self.cells.push((bit, cand));
            self.assign[i] = self.cells.len() - 1;
            self.run(i + 1);
            self.cells.pop();
        }
    }
}

/// R_n(d, μⁿ) by enumeration of all set partitions of the windowed block space
/// whose cells hold a member within ρ_n ≤ d of every other member.
pub fn brute_force_rn(inst: &FiniteInstance) -> Result<BruteForce> {
    brute_force_rn_with_budget(inst, BRUTE_FORCE_BUDGET)
}

pub fn brute_force_rn_with_budget(inst: &FiniteInstance, budget: u128) -> Result<BruteForce> {
    let t = Tables::build(inst, budget)?;
    let mut s = Search {
        t: &t,
        cells: Vec::with_capacity(t.npts),
        assign: vec![0; t.npts],
        best: f64::INFINITY,
        best_rgs: vec![],
        best_cells: vec![],
        scratch: Vec::with_capacity(t.npts),
    };
    s.run(0);
    let (rgs, cells_found) = (s.best_rgs, s.best_cells);
    let entropy = s.best;
    let mut cells = Vec::new();
    let mut protos = Vec::new();
    for &(mask, cand) in &cells_found {
        cells.push((0..t.npts).filter(|i| mask >> i & 1 == 1).map(|i| t.blocks[i].clone()).collect());
        protos.push(t.blocks[cand.trailing_zeros() as usize].clone());
    }
    let mut cell_masses: Vec<BigRational> = cells_found.iter().map(|c| t.mass(c.0)).collect();
    cell_masses.sort();
    Ok(BruteForce {
        rate: entropy / inst.n() as f64,
        entropy,
        partition: BlockPartition::new(cells, protos)?,
        rgs,
        cell_masses,
    })
}

/// Minimum partition entropy (bits per block) by subset dynamic programming,
/// an independent cross-check of the enumeration.
pub fn min_entropy_dp(inst: &FiniteInstance, budget: u128) -> Result<f64> {
    let t = Tables::build(inst, budget)?;
    let feasible = crate::universal_codes::partition::feasible_in_cell(t.npts, &t.covered_by);
    let full = (1usize << t.npts) - 1;
    let mut best = vec![f64::INFINITY; full + 1];
    best[0] = 0.0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut sub = rest;
        loop {
            let cell = sub | low;
            if feasible[cell] {
                best[mask] = best[mask].min(t.term[cell] + best[mask ^ cell]);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    Ok(best[full])
}

/// H_{σ(π)}(μⁿ) in bits per block for a partition of the instance's block space.
pub fn partition_entropy(inst: &FiniteInstance, partition: &BlockPartition) -> Result<f64> {
    let blocks = inst.blocks();
    if !partition.covers(&blocks) {
        return Err(Error::ConfigInvalid("partition does not cover the instance block space".into()));
    }
    let (weights, total) = inst.block_weights();
    let mut cells: Vec<BigUint> = partition
        .cells()
        .iter()
        .map(|c| c.iter().map(|b| &weights[blocks.binary_search(b).unwrap()]).sum())
        .collect();
    cells.sort();
    Ok(cells.iter().map(|w| plogp(ratio_to_f64(w, &total))).sum())
}

/// Outcome of the truncation identities on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationCheck {
    pub k: u64,
    /// R_n under ρ.
    pub plain: f64,
    /// R_n under ρ^k.
    pub truncated: f64,
    /// R_n of the S_k image under ρ̃.
    pub image: f64,
    /// R_n under ρ^k ≤ R_n under ρ.
    pub dominated: bool,
    /// R_n of the image equals R_n under ρ^k.
    pub image_equal: bool,
}

pub fn truncation_check(inst: &FiniteInstance, k: u64) -> Result<TruncationCheck> {
    let plain = brute_force_rn(inst)?;
    let truncated = brute_force_rn(&inst.truncated(k))?;
    let image = brute_force_rn(&inst.image(k))?;
    Ok(TruncationCheck {
        k,
        plain: plain.rate,
        truncated: truncated.rate,
        image: image.rate,
        dominated: truncated.rate <= plain.rate,
        image_equal: image.rate == truncated.rate && image.cell_masses == truncated.cell_masses,
    })
}
