//! Type-indexed D-semifaithful code for blocks over the truncated alphabet Γ_{k+1}.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::bits::{elias_gamma_len, elias_gamma_read, elias_gamma_write, BitReader, BitWriter};
use super::combinatorics::{binomial, multinomial, sequence_rank, sequence_unrank, subset_rank, subset_unrank};
use super::partition::{all_blocks, covering_masks, entropy_of_sizes, feasible_external, min_entropy_uniform, BlockPartition};
use super::prefix::FiniteCode;
use super::sfe::sfe_from_weights;
use super::types::{enumerate_types, type_of, CompactTypeCode, DEFAULT_TYPE_BUDGET};
use crate::distortion::DistortionSpec;
use crate::error::{Error, Result};
use crate::rational::{ceil_log2, ceil_log2_u, Rational};

/// Largest type class the oracle mode partitions exactly.
pub const DEFAULT_ORACLE_BUDGET: u64 = 12;

/// Candidate prototypes scanned per type class in oracle mode.
const PROTOTYPE_BUDGET: u128 = 1 << 20;

/// Type classes enumerated explicitly for grid-mode partitions.
const GRID_ENUMERATION_BUDGET: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FirstStageMode {
    /// Letterwise quantizer with cell radius within d.
    Grid,
    /// Exact minimum-entropy partition of each type class.
    Oracle,
    /// Best constant letter plus exact correction of the worst positions.
    Covering,
}

impl FirstStageMode {
    pub fn id(self) -> u8 {
        match self {
            FirstStageMode::Grid => 0,
            FirstStageMode::Oracle => 1,
            FirstStageMode::Covering => 2,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            0 => Ok(FirstStageMode::Grid),
            1 => Ok(FirstStageMode::Oracle),
            2 => Ok(FirstStageMode::Covering),
            _ => Err(Error::MalformedStream(format!("unknown first-stage mode {id}"))),
        }
    }
}

impl fmt::Display for FirstStageMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FirstStageMode::Grid => "grid",
            FirstStageMode::Oracle => "oracle",
            FirstStageMode::Covering => "covering",
        })
    }
}

impl FromStr for FirstStageMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(FirstStageMode::Grid),
            "oracle" => Ok(FirstStageMode::Oracle),
            "covering" => Ok(FirstStageMode::Covering),
            _ => Err(Error::ConfigInvalid(format!("unknown first-stage mode '{s}'"))),
        }
    }
}

/// Letterwise grid quantizer on `floor..floor+size` with prototypes spaced 2r+1 apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridQuantizer {
    floor: u64,
    size: u64,
    radius: u64,
}

impl GridQuantizer {
    pub fn new(floor: u64, size: u64, spec: &DistortionSpec, d: Rational) -> Self {
        let radius = spec.covering_radius(d).min(size);
        GridQuantizer { floor, size, radius }
    }

    pub fn radius(&self) -> u64 {
        self.radius
    }

    pub fn quantize(&self, y: u64) -> u64 {
        let step = 2 * self.radius + 1;
        let top = self.floor + self.size - 1;
        (self.floor + (y - self.floor) / step * step + self.radius).min(top)
    }

    /// Type of the quantized block, from the type of the block.
    pub fn push_type(&self, counts: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; counts.len()];
        for (a, &c) in counts.iter().enumerate() {
            out[(self.quantize(self.floor + a as u64) - self.floor) as usize] += c;
        }
        out
    }
}

/// Uniform SFE codeword for index i of N: length ⌈log₂ N⌉ + 1.
fn uniform_sfe_write(i: &BigUint, count: &BigUint, w: &mut BitWriter) {
    let len = ceil_log2_u(count) + 1;
    let num = ((i << 1usize) + 1u32) << len as usize;
    w.write_big(&(num / (count << 1usize)), len);
}

fn uniform_sfe_read(count: &BigUint, r: &mut BitReader<'_>) -> Result<BigUint> {
    let len = ceil_log2_u(count) + 1;
    let v = r.read_big(len)?;
    let i = (&v * count) >> len as usize;
    let mut check = BitWriter::new();
    uniform_sfe_write(&i, count, &mut check);
    let expect = BitReader::new(check.bytes(), check.len()).peek_big(len);
    if i >= *count || expect != v {
        return Err(Error::MalformedStream("invalid cell codeword".into()));
    }
    Ok(i)
}

/// Partition of one type class with an SFE code over its cells (cells weighted by size).
#[derive(Debug, Clone)]
pub struct PerTypeCode {
    counts: Vec<u64>,
    members: Vec<Vec<u64>>,
    cell_of_member: Vec<usize>,
    partition: BlockPartition,
    sizes: Vec<u64>,
    code: FiniteCode,
}

impl PerTypeCode {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn members(&self) -> &[Vec<u64>] {
        &self.members
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn code(&self) -> &FiniteCode {
        &self.code
    }

    pub fn cell_sizes(&self) -> &[u64] {
        &self.sizes
    }

    /// Entropy of the induced partition under the uniform law on the class.
    pub fn cell_entropy(&self) -> f64 {
        entropy_of_sizes(&self.sizes)
    }

    /// Exact expected codeword length under the uniform law on the class.
    pub fn expected_length(&self) -> BigRational {
        let total: u64 = self.sizes.iter().sum();
        let num: u64 = self.sizes.iter().zip(self.code.lengths()).map(|(s, l)| s * l).sum();
        BigRational::new(BigInt::from(num), BigInt::from(total))
    }

    fn cell_for(&self, block: &[u64]) -> Option<usize> {
        let i = self.members.binary_search_by(|m| m.as_slice().cmp(block)).ok()?;
        Some(self.cell_of_member[i])
    }
}

fn class_members(counts: &[u64], floor: u64) -> Vec<Vec<u64>> {
    let size = multinomial(counts);
    let size: u64 = size.to_u64().expect("class size checked by caller");
    (0..size)
        .map(|r| {
            sequence_unrank(BigUint::from(r), counts)
                .expect("rank within class")
                .into_iter()
                .map(|a| floor + a as u64)
                .collect()
        })
        .collect()
}

/// Code for blocks of type `counts` over `floor..floor+counts.len()`.
///
/// Oracle mode partitions the class exactly with prototypes anywhere in the
/// alphabet; grid mode groups the class by the letterwise quantizer.
pub fn per_type_code(
    counts: &[u64],
    floor: u64,
    spec: &DistortionSpec,
    d: Rational,
    mode: FirstStageMode,
    budget: u64,
) -> Result<PerTypeCode> {
    let k = counts.len();
    let n: u64 = counts.iter().sum();
    let class = multinomial(counts);
    match mode {
        FirstStageMode::Oracle => {
            if class > BigUint::from(budget) {
                let needed = class.to_u128().unwrap_or(u128::MAX);
                return Err(Error::BudgetExceeded { needed, budget: budget as u128 });
            }
            let space = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
            if space > PROTOTYPE_BUDGET {
                return Err(Error::BudgetExceeded { needed: space, budget: PROTOTYPE_BUDGET });
            }
            let members = class_members(counts, floor);
            let candidates = all_blocks(floor, k, n as usize);
            let masks = covering_masks(&members, &candidates, spec, d)?;
            let feasible = feasible_external(members.len(), &masks);
            let cells = min_entropy_uniform(members.len(), &feasible);
            let mut cell_of_member = vec![0usize; members.len()];
            let mut blocks = Vec::with_capacity(cells.len());
            let mut protos = Vec::with_capacity(cells.len());
            for (c, &cell) in cells.iter().enumerate() {
                let mut bs = Vec::new();
                for (i, m) in members.iter().enumerate() {
                    if cell >> i & 1 == 1 {
                        cell_of_member[i] = c;
                        bs.push(m.clone());
                    }
                }
                let z = masks.iter().position(|&m| m & cell == cell).expect("feasible cell has a prototype");
                blocks.push(bs);
                protos.push(candidates[z].clone());
            }
            build_per_type(counts, members, cell_of_member, blocks, protos)
        }
        FirstStageMode::Grid => {
            if class > BigUint::from(GRID_ENUMERATION_BUDGET) {
                let needed = class.to_u128().unwrap_or(u128::MAX);
                return Err(Error::BudgetExceeded { needed, budget: GRID_ENUMERATION_BUDGET as u128 });
            }
            let q = GridQuantizer::new(floor, k as u64, spec, d);
            let members = class_members(counts, floor);
            let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
            let mut blocks: Vec<Vec<Vec<u64>>> = Vec::new();
            let mut protos = Vec::new();
            let mut cell_of_member = Vec::with_capacity(members.len());
            for m in &members {
                let z: Vec<u64> = m.iter().map(|&y| q.quantize(y)).collect();
                let c = *index.entry(z.clone()).or_insert_with(|| {
                    blocks.push(Vec::new());
                    protos.push(z);
                    blocks.len() - 1
                });
                blocks[c].push(m.clone());
                cell_of_member.push(c);
            }
            build_per_type(counts, members, cell_of_member, blocks, protos)
        }
        FirstStageMode::Covering => {
            Err(Error::ConfigInvalid("covering mode has no per-type partition".into()))
        }
    }
}

fn build_per_type(
    counts: &[u64],
    members: Vec<Vec<u64>>,
    cell_of_member: Vec<usize>,
    blocks: Vec<Vec<Vec<u64>>>,
    protos: Vec<Vec<u64>>,
) -> Result<PerTypeCode> {
    let sizes: Vec<u64> = blocks.iter().map(|b| b.len() as u64).collect();
    let weights: Vec<BigUint> = sizes.iter().map(|&s| BigUint::from(s)).collect();
    let code = sfe_from_weights(&weights)?;
    let partition = BlockPartition::new(blocks, protos)?;
    Ok(PerTypeCode { counts: counts.to_vec(), members, cell_of_member, partition, sizes, code })
}

/// First-stage encoder/decoder for blocks of length n over `floor..=k+1`.
#[derive(Debug, Clone)]
pub struct FirstStage {
    floor: u64,
    size: usize,
    n: u64,
    spec: DistortionSpec,
    d: Rational,
    mode: FirstStageMode,
    type_code: CompactTypeCode,
    grid: GridQuantizer,
    oracle: Option<Arc<HashMap<Vec<u64>, PerTypeCode>>>,
}

impl FirstStage {
    pub fn new(floor: u64, k: u64, n: u64, spec: DistortionSpec, d: Rational, mode: FirstStageMode) -> Result<Self> {
        Self::with_budget(floor, k, n, spec, d, mode, DEFAULT_ORACLE_BUDGET)
    }

    pub fn with_budget(
        floor: u64,
        k: u64,
        n: u64,
        spec: DistortionSpec,
        d: Rational,
        mode: FirstStageMode,
        budget: u64,
    ) -> Result<Self> {
        if k < floor || k == 0 {
            return Err(Error::ConfigInvalid(format!("threshold k = {k} must be >= max(1, floor = {floor})")));
        }
        if d < Rational::zero() {
            return Err(Error::InvalidDistortion("d must be nonnegative".into()));
        }
        let size = (k + 2 - floor) as usize;
        let type_code = CompactTypeCode::new(size, n)?;
        let grid = GridQuantizer::new(floor, size as u64, &spec, d);
        let oracle = if mode == FirstStageMode::Oracle {
            let types = enumerate_types(size, n, DEFAULT_TYPE_BUDGET)?;
            if let Some(big) = types.class_sizes().iter().find(|s| **s > BigUint::from(budget)) {
                return Err(Error::BudgetExceeded {
                    needed: big.to_u128().unwrap_or(u128::MAX),
                    budget: budget as u128,
                });
            }
            let codes = types
                .types()
                .par_iter()
                .map(|p| Ok((p.clone(), per_type_code(p, floor, &spec, d, mode, budget)?)))
                .collect::<Result<HashMap<_, _>>>()?;
            Some(Arc::new(codes))
        } else {
            None
        };
        Ok(FirstStage { floor, size, n, spec, d, mode, type_code, grid, oracle })
    }

    pub fn mode(&self) -> FirstStageMode {
        self.mode
    }

    pub fn alphabet_size(&self) -> usize {
        self.size
    }

    pub fn type_code(&self) -> &CompactTypeCode {
        &self.type_code
    }

    pub fn quantizer(&self) -> &GridQuantizer {
        &self.grid
    }

    /// Precomputed per-type code (oracle mode only).
    pub fn per_type(&self, counts: &[u64]) -> Option<&PerTypeCode> {
        self.oracle.as_ref()?.get(counts)
    }

    /// Writes the type index and the cell codeword; returns the reconstruction.
    pub fn encode(&self, y: &[u64], w: &mut BitWriter) -> Result<Vec<u64>> {
        if y.len() as u64 != self.n {
            return Err(Error::LengthMismatch(y.len(), self.n as usize));
        }
        let counts = type_of(y, self.floor, self.size)?;
        self.type_code.encode(&counts, w)?;
        let yhat = match self.mode {
            FirstStageMode::Grid => {
                let yhat: Vec<u64> = y.iter().map(|&a| self.grid.quantize(a)).collect();
                let image = self.grid.push_type(&counts);
                let seq: Vec<usize> = yhat.iter().map(|&a| (a - self.floor) as usize).collect();
                uniform_sfe_write(&sequence_rank(&seq, self.size), &multinomial(&image), w);
                yhat
            }
            FirstStageMode::Oracle => {
                let code = self.per_type(&counts).expect("all types precomputed");
                let c = code.cell_for(y).expect("block lies in its type class");
                code.code().encode(c, w);
                code.partition().prototypes()[c].clone()
            }
            FirstStageMode::Covering => self.encode_covering(y, &counts, w)?,
        };
        Ok(yhat)
    }

    pub fn decode(&self, r: &mut BitReader<'_>) -> Result<Vec<u64>> {
        let counts = self.type_code.decode(r)?;
        match self.mode {
            FirstStageMode::Grid => {
                let image = self.grid.push_type(&counts);
                let rank = uniform_sfe_read(&multinomial(&image), r)?;
                let seq = sequence_unrank(rank, &image)
                    .ok_or_else(|| Error::MalformedStream("cell index out of range".into()))?;
                Ok(seq.into_iter().map(|a| self.floor + a as u64).collect())
            }
            FirstStageMode::Oracle => {
                let code = self
                    .per_type(&counts)
                    .ok_or_else(|| Error::MalformedStream("unknown type".into()))?;
                let c = code.code().decode(r)?;
                Ok(code.partition().prototypes()[c].clone())
            }
            FirstStageMode::Covering => self.decode_covering(&counts, r),
        }
    }

    fn letter_rho(&self, a: u64, b: u64) -> Rational {
        self.spec.rho(a, b)
    }

    /// Letter c minimizing Σ_a counts[a]·ρ(a, c); smallest on ties.
    fn best_constant(&self, counts: &[u64]) -> u64 {
        let mut best = (Rational::zero(), self.floor);
        for c in 0..self.size as u64 {
            let letter = self.floor + c;
            let cost = counts.iter().enumerate().fold(Rational::zero(), |acc, (a, &m)| {
                acc + self.letter_rho(self.floor + a as u64, letter) * Rational::from(m as i128)
            });
            if c == 0 || cost < best.0 {
                best = (cost, letter);
            }
        }
        best.1
    }

    fn value_width(&self) -> u32 {
        ceil_log2(self.size as u128)
    }

    fn encode_covering(&self, y: &[u64], counts: &[u64], w: &mut BitWriter) -> Result<Vec<u64>> {
        let c = self.best_constant(counts);
        let budget = self.d * Rational::from(self.n as i128);
        let mut costs: Vec<(Rational, usize)> =
            y.iter().enumerate().map(|(i, &a)| (self.letter_rho(a, c), i)).collect();
        let mut excess = costs.iter().fold(Rational::zero(), |acc, (r, _)| acc + *r);
        costs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut picked = Vec::new();
        for (r, i) in costs {
            if excess <= budget {
                break;
            }
            excess -= r;
            picked.push(i as u64);
        }
        picked.sort_unstable();
        let m = picked.len() as u64;
        elias_gamma_write(w, m + 1);
        w.write_big(&subset_rank(&picked), ceil_log2_u(&binomial(self.n, m)));
        let mut yhat = vec![c; y.len()];
        for &p in &picked {
            let v = y[p as usize];
            w.write_u64(v - self.floor, self.value_width());
            yhat[p as usize] = v;
        }
        Ok(yhat)
    }

    fn decode_covering(&self, counts: &[u64], r: &mut BitReader<'_>) -> Result<Vec<u64>> {
        let c = self.best_constant(counts);
        let m = elias_gamma_read(r)? - 1;
        if m > self.n {
            return Err(Error::MalformedStream("more corrections than positions".into()));
        }
        let rank = r.read_big(ceil_log2_u(&binomial(self.n, m)))?;
        let picked = subset_unrank(rank, m, self.n)
            .ok_or_else(|| Error::MalformedStream("position rank out of range".into()))?;
        let mut yhat = vec![c; self.n as usize];
        for p in picked {
            let v = self.floor + r.read_u64(self.value_width())?;
            if v >= self.floor + self.size as u64 {
                return Err(Error::MalformedStream(format!("corrected symbol {v} outside alphabet")));
            }
            yhat[p as usize] = v;
        }
        Ok(yhat)
    }

    /// Kraft sums of every finite code this stage uses with a fixed type (exact).
    pub fn kraft_sums(&self) -> Vec<BigRational> {
        let mut out = vec![self.type_code.kraft_sum()];
        if let Some(codes) = &self.oracle {
            let mut keys: Vec<&Vec<u64>> = codes.keys().collect();
            keys.sort();
            out.extend(keys.into_iter().map(|p| codes[p].code().kraft_sum()));
        }
        out
    }

    pub fn distortion_level(&self) -> Rational {
        self.d
    }

    /// Exact Kraft sum of the code that follows the type index for blocks of type `counts`.
    pub fn cell_kraft_sum(&self, counts: &[u64]) -> Result<BigRational> {
        if counts.len() != self.size || counts.iter().sum::<u64>() != self.n {
            return Err(Error::ConfigInvalid(format!("{counts:?} is not a type of this stage")));
        }
        let pow2 = |e: u64| BigInt::from(BigUint::from(1u32) << e as usize);
        match self.mode {
            FirstStageMode::Grid => {
                let m = multinomial(&self.grid.push_type(counts));
                Ok(BigRational::new(m.clone().into(), pow2(ceil_log2_u(&m) + 1)))
            }
            FirstStageMode::Oracle => self
                .per_type(counts)
                .map(|c| c.code().kraft_sum())
                .ok_or_else(|| Error::ConfigInvalid(format!("no oracle code for {counts:?}"))),
            FirstStageMode::Covering => {
                // Gamma count, position rank, then one fixed-width value per corrected position.
                let width = self.value_width() as u64;
                let mut sum = BigRational::zero();
                for m in 0..=self.n {
                    let c = binomial(self.n, m);
                    let values = BigUint::from(self.size as u64).pow(m as u32);
                    let len = elias_gamma_len(m + 1) + ceil_log2_u(&c) + m * width;
                    sum += BigRational::new((c * values).into(), pow2(len));
                }
                Ok(sum)
            }
        }
    }
}
