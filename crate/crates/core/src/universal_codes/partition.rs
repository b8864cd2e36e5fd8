//! Block partitions with prototypes and exact minimum-entropy partition search.

use std::collections::HashSet;

use crate::distortion::DistortionSpec;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Cells of blocks, each with a designated reconstruction block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    cells: Vec<Vec<Vec<u64>>>,
    prototypes: Vec<Vec<u64>>,
}

impl BlockPartition {
    pub fn new(cells: Vec<Vec<Vec<u64>>>, prototypes: Vec<Vec<u64>>) -> Result<Self> {
        if cells.len() != prototypes.len() {
            return Err(Error::ConfigInvalid(format!(
                "{} cells but {} prototypes",
                cells.len(),
                prototypes.len()
            )));
        }
        let mut seen = HashSet::new();
        for cell in &cells {
            if cell.is_empty() {
                return Err(Error::ConfigInvalid("empty cell".into()));
            }
            for b in cell {
                if !seen.insert(b.clone()) {
                    return Err(Error::ConfigInvalid(format!("block {b:?} lies in two cells")));
                }
            }
        }
        Ok(BlockPartition { cells, prototypes })
    }

    pub fn singletons(blocks: &[Vec<u64>]) -> Self {
        BlockPartition {
            cells: blocks.iter().map(|b| vec![b.clone()]).collect(),
            prototypes: blocks.to_vec(),
        }
    }

    pub fn cells(&self) -> &[Vec<Vec<u64>>] {
        &self.cells
    }

    pub fn prototypes(&self) -> &[Vec<u64>] {
        &self.prototypes
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_of(&self, block: &[u64]) -> Option<usize> {
        self.cells.iter().position(|c| c.iter().any(|b| b == block))
    }

    pub fn prototypes_in_cells(&self) -> bool {
        self.cells.iter().zip(&self.prototypes).all(|(c, p)| c.contains(p))
    }

    /// The cells cover exactly the given block set.
    pub fn covers(&self, space: &[Vec<u64>]) -> bool {
        let mine: HashSet<&Vec<u64>> = self.cells.iter().flatten().collect();
        let theirs: HashSet<&Vec<u64>> = space.iter().collect();
        mine == theirs && mine.len() == self.cells.iter().map(Vec::len).sum::<usize>()
    }

    /// Largest ρ_n from a member to its prototype, per cell.
    pub fn cell_radii(&self, spec: &DistortionSpec) -> Result<Vec<Rational>> {
        self.cells
            .iter()
            .zip(&self.prototypes)
            .map(|(cell, proto)| {
                cell.iter().try_fold(Rational::from(0), |acc, b| Ok(acc.max(spec.rho_block(b, proto)?)))
            })
            .collect()
    }

    /// Exact check that every cell is d-covered by its prototype.
    pub fn certify(&self, spec: &DistortionSpec, d: Rational) -> Result<bool> {
        Ok(self.cell_radii(spec)?.iter().all(|r| *r <= d))
    }
}

/// All blocks of length n over `floor..floor+k`, in lexicographic order.
pub fn all_blocks(floor: u64, k: usize, n: usize) -> Vec<Vec<u64>> {
    let total = k.pow(n as u32);
    (0..total)
        .map(|mut code| {
            let mut b = vec![floor; n];
            for slot in b.iter_mut().rev() {
                *slot = floor + (code % k) as u64;
                code /= k;
            }
            b
        })
        .collect()
}

/// For each candidate, the bitmask of points within block distortion d.
pub(crate) fn covering_masks(
    points: &[Vec<u64>],
    candidates: &[Vec<u64>],
    spec: &DistortionSpec,
    d: Rational,
) -> Result<Vec<u64>> {
    assert!(points.len() <= 64, "at most 64 points per mask");
    candidates
        .iter()
        .map(|z| {
            let mut m = 0u64;
            for (i, y) in points.iter().enumerate() {
                if spec.rho_block(y, z)? <= d {
                    m |= 1 << i;
                }
            }
            Ok(m)
        })
        .collect()
}

/// Subsets contained in some mask (downward closure).
pub(crate) fn feasible_external(npts: usize, masks: &[u64]) -> Vec<bool> {
    let mut f = vec![false; 1 << npts];
    for &m in masks {
        f[m as usize] = true;
    }
    for mask in (0..f.len()).rev() {
        if f[mask] {
            let mut bits = mask;
            while bits != 0 {
                let b = bits & bits.wrapping_neg();
                f[mask ^ b] = true;
                bits ^= b;
            }
        }
    }
    f
}

/// Subsets S holding a member y with S ⊆ cover(y).
pub(crate) fn feasible_in_cell(npts: usize, point_masks: &[u64]) -> Vec<bool> {
    let mut f = vec![false; 1 << npts];
    for (i, &m) in point_masks.iter().enumerate() {
        let rest = m & !(1 << i);
        let mut sub = rest;
        loop {
            f[(sub | (1 << i)) as usize] = true;
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    f
}

/// `a` precedes `b` in the restricted-growth order of first cells.
pub(crate) fn rgs_prefers(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    diff != 0 && a & (diff & diff.wrapping_neg()) != 0
}

/// Minimum-entropy partition of `npts` equally likely points into feasible cells,
/// with ties broken towards the smallest restricted-growth string.
///
/// Minimizes entropy by maximizing Π |C|^|C| exactly.
pub(crate) fn min_entropy_uniform(npts: usize, feasible: &[bool]) -> Vec<u64> {
    assert!(npts <= 24, "uniform partition search is limited to 24 points");
    let full = (1usize << npts) - 1;
    let mut best = vec![0u128; 1 << npts];
    let mut choice = vec![0u64; 1 << npts];
    best[0] = 1;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut sub = rest;
        let mut top = 0u128;
        let mut pick = 0u64;
        loop {
            let cell = sub | low;
            if feasible[cell] {
                let s = cell.count_ones() as u128;
                let v = s.pow(s as u32) * best[mask ^ cell];
                if v > top || (v == top && rgs_prefers(cell as u64, pick)) {
                    top = v;
                    pick = cell as u64;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best[mask] = top;
        choice[mask] = pick;
    }
    let mut cells = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let c = choice[mask];
        cells.push(c);
        mask ^= c as usize;
    }
    cells
}

/// Entropy in bits of cell masses given as integer weights.
pub fn entropy_of_sizes(sizes: &[u64]) -> f64 {
    let total: u64 = sizes.iter().sum();
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    sorted.iter().map(|&s| crate::special::plogp(s as f64 / total as f64)).sum()
}
