//! Method of types: count vectors, class sizes and fixed-width type indices.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use super::bits::{BitReader, BitWriter};
use super::combinatorics::{composition_count, composition_rank, composition_unrank, multinomial};
use crate::error::{Error, Result};
use crate::rational::{ceil_log2, ceil_log2_u};

/// Default bound on (n+1)^k for explicit type enumeration.
pub const DEFAULT_TYPE_BUDGET: u128 = 1 << 24;

/// All types of length-n sequences over k letters, in descending lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeClassIndex {
    k: usize,
    n: u64,
    types: Vec<Vec<u64>>,
    sizes: Vec<BigUint>,
}

impl TypeClassIndex {
    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn block_length(&self) -> u64 {
        self.n
    }

    pub fn types(&self) -> &[Vec<u64>] {
        &self.types
    }

    pub fn class_sizes(&self) -> &[BigUint] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn position(&self, counts: &[u64]) -> Option<usize> {
        if counts.len() != self.k || counts.iter().sum::<u64>() != self.n {
            return None;
        }
        let r = composition_rank(counts);
        Some(r.try_into().ok()?)
    }
}

fn budget_check(k: usize, n: u64, budget: u128) -> Result<()> {
    if k == 0 || n == 0 {
        return Err(Error::ConfigInvalid(format!("types need k >= 1 and n >= 1, got k = {k}, n = {n}")));
    }
    let needed = (n as u128 + 1).checked_pow(k as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(())
}

pub fn enumerate_types(k: usize, n: u64, budget: u128) -> Result<TypeClassIndex> {
    budget_check(k, n, budget)?;
    let mut types = Vec::new();
    let mut cur = vec![0u64; k];
    fill(&mut cur, 0, n, &mut types);
    let sizes = types.iter().map(|t| multinomial(t)).collect();
    Ok(TypeClassIndex { k, n, types, sizes })
}

fn fill(cur: &mut Vec<u64>, j: usize, rem: u64, out: &mut Vec<Vec<u64>>) {
    if j + 1 == cur.len() {
        cur[j] = rem;
        out.push(cur.clone());
        return;
    }
    for c in (0..=rem).rev() {
        cur[j] = c;
        fill(cur, j + 1, rem - c, out);
    }
}

/// Counts of the letters `floor..floor+k` in `block`.
pub fn type_of(block: &[u64], floor: u64, k: usize) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; k];
    for &x in block {
        let i = x.checked_sub(floor).filter(|&i| (i as usize) < k).ok_or(Error::SymbolOutOfAlphabet(x))?;
        counts[i as usize] += 1;
    }
    Ok(counts)
}

/// Fixed-width type index with one ⌈log₂(n+1)⌉-bit field per letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeIndexCode {
    k: usize,
    n: u64,
    field: u32,
}

impl TypeIndexCode {
    pub fn new(k: usize, n: u64, budget: u128) -> Result<Self> {
        budget_check(k, n, budget)?;
        Ok(TypeIndexCode { k, n, field: ceil_log2(n as u128 + 1) })
    }

    pub fn width(&self) -> u64 {
        self.k as u64 * self.field as u64
    }

    pub fn encode(&self, counts: &[u64], w: &mut BitWriter) -> Result<()> {
        check_type(counts, self.k, self.n)?;
        for &c in counts {
            w.write_u64(c, self.field);
        }
        Ok(())
    }

    pub fn decode(&self, r: &mut BitReader<'_>) -> Result<Vec<u64>> {
        let counts = (0..self.k).map(|_| r.read_u64(self.field)).collect::<Result<Vec<_>>>()?;
        check_type(&counts, self.k, self.n).map_err(|_| Error::MalformedStream("invalid type index".into()))?;
        Ok(counts)
    }

    /// Exact Kraft sum: number of types over 2^width.
    pub fn kraft_sum(&self) -> BigRational {
        kraft_of(composition_count(self.n, self.k as u64), self.width())
    }
}

/// Type index as the rank of the count vector, ⌈log₂ |P̃_n|⌉ bits wide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactTypeCode {
    k: usize,
    n: u64,
    count: BigUint,
    width: u64,
}

impl CompactTypeCode {
    pub fn new(k: usize, n: u64) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::ConfigInvalid(format!("types need k >= 1 and n >= 1, got k = {k}, n = {n}")));
        }
        let count = composition_count(n, k as u64);
        let width = ceil_log2_u(&count);
        Ok(CompactTypeCode { k, n, count, width })
    }

    pub fn width(&self) -> u64 {
        self.width
    }

    pub fn num_types(&self) -> &BigUint {
        &self.count
    }

    pub fn encode(&self, counts: &[u64], w: &mut BitWriter) -> Result<()> {
        check_type(counts, self.k, self.n)?;
        w.write_big(&composition_rank(counts), self.width);
        Ok(())
    }

    pub fn decode(&self, r: &mut BitReader<'_>) -> Result<Vec<u64>> {
        let rank = r.read_big(self.width)?;
        composition_unrank(rank, self.n, self.k as u64)
            .ok_or_else(|| Error::MalformedStream("type rank out of range".into()))
    }

    pub fn kraft_sum(&self) -> BigRational {
        kraft_of(self.count.clone(), self.width)
    }
}

fn kraft_of(count: BigUint, width: u64) -> BigRational {
    BigRational::new(count.into(), (BigUint::one() << width as usize).into())
}

fn check_type(counts: &[u64], k: usize, n: u64) -> Result<()> {
    if counts.len() != k || counts.iter().sum::<u64>() != n {
        return Err(Error::ConfigInvalid(format!("{counts:?} is not a type of length {n} over {k} letters")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source_models::{rng_from_seed, SourcePmf};
    use crate::universal_codes::combinatorics::sequence_rank;
    use proptest::prelude::*;

    #[test]
    fn enumeration_examples() {
        let t = enumerate_types(2, 2, DEFAULT_TYPE_BUDGET).unwrap();
        assert_eq!(t.types(), &[vec![2, 0], vec![1, 1], vec![0, 2]]);
        let sizes: Vec<u64> = t.class_sizes().iter().map(|s| s.try_into().unwrap()).collect();
        assert_eq!(sizes, vec![1, 2, 1]);
        assert_eq!(enumerate_types(2, 3, DEFAULT_TYPE_BUDGET).unwrap().len(), 4);
        assert_eq!(enumerate_types(3, 1, DEFAULT_TYPE_BUDGET).unwrap().len(), 3);
        assert!(matches!(enumerate_types(3, 9, 100), Err(Error::BudgetExceeded { needed: 1000, budget: 100 })));
    }

    #[test]
    fn classes_partition_block_space() {
        for (k, n) in [(2usize, 5u64), (3, 4), (4, 3)] {
            let t = enumerate_types(k, n, DEFAULT_TYPE_BUDGET).unwrap();
            let total: BigUint = t.class_sizes().iter().sum();
            assert_eq!(total, BigUint::from(k).pow(n as u32));
            assert!(t.len() as u128 <= (n as u128 + 1).pow(k as u32));
            for (i, p) in t.types().iter().enumerate() {
                assert_eq!(t.position(p), Some(i));
            }
        }
    }

    #[test]
    fn type_index_widths() {
        let c = TypeIndexCode::new(2, 3, DEFAULT_TYPE_BUDGET).unwrap();
        assert_eq!(c.width(), 4);
        assert_eq!(TypeIndexCode::new(1, 1, DEFAULT_TYPE_BUDGET).unwrap().width(), 1);
        let t = enumerate_types(2, 3, DEFAULT_TYPE_BUDGET).unwrap();
        let mut seen = std::collections::HashSet::new();
        for p in t.types() {
            let mut w = BitWriter::new();
            c.encode(p, &mut w).unwrap();
            assert_eq!(w.len(), 4);
            assert!(seen.insert(w.bytes().to_vec()));
            let len = w.len();
            let bytes = w.into_bytes();
            assert_eq!(&c.decode(&mut BitReader::new(&bytes, len)).unwrap(), p);
        }
        assert!(c.kraft_sum() <= BigRational::one());
    }

    #[test]
    fn compact_roundtrip_all_types() {
        for (k, n) in [(3usize, 4u64), (5, 6), (1, 3)] {
            let code = CompactTypeCode::new(k, n).unwrap();
            let t = enumerate_types(k, n, DEFAULT_TYPE_BUDGET).unwrap();
            assert_eq!(BigUint::from(t.len()), *code.num_types());
            for p in t.types() {
                let mut w = BitWriter::new();
                code.encode(p, &mut w).unwrap();
                assert_eq!(w.len(), code.width());
                let len = w.len();
                let bytes = w.into_bytes();
                assert_eq!(&code.decode(&mut BitReader::new(&bytes, len)).unwrap(), p);
            }
            assert!(code.kraft_sum() <= BigRational::one());
        }
    }

    #[test]
    fn conditional_distribution_given_type_is_uniform() {
        // Blocks of length 4 over {1,2,3} conditioned on type (2,1,1): 12 equally likely sequences.
        let pmf = SourcePmf::new(1, vec![0.5, 0.3, 0.2], None).unwrap();
        let mut hits = vec![0u64; 12];
        let mut rng = rng_from_seed(9);
        let sampler = crate::source_models::Sampler::new(&pmf);
        let mut total = 0u64;
        while total < 100_000 {
            let b = sampler.sample_block(&mut rng, 4);
            if type_of(&b, 1, 3).unwrap() == [2, 1, 1] {
                let s: Vec<usize> = b.iter().map(|&x| (x - 1) as usize).collect();
                let r: usize = sequence_rank(&s, 3).try_into().unwrap();
                hits[r] += 1;
                total += 1;
            }
        }
        let p = 1.0 / 12.0;
        let sigma = (total as f64 * p * (1.0 - p)).sqrt();
        for h in hits {
            assert!((h as f64 - total as f64 * p).abs() <= 4.0 * sigma, "{h}");
        }
    }

    proptest! {
        #[test]
        fn type_index_is_injective_roundtrip(counts in proptest::collection::vec(0u64..9, 1..5)) {
            let n: u64 = counts.iter().sum::<u64>().max(1);
            let mut counts = counts;
            if counts.iter().sum::<u64>() == 0 { counts[0] = 1; }
            let code = TypeIndexCode::new(counts.len(), n, DEFAULT_TYPE_BUDGET).unwrap();
            let mut w = BitWriter::new();
            code.encode(&counts, &mut w).unwrap();
            let len = w.len();
            let bytes = w.into_bytes();
            prop_assert_eq!(code.decode(&mut BitReader::new(&bytes, len)).unwrap(), counts);
        }
    }
}
