use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::bits::{BitReader, BitWriter, Codeword};
use super::sfe::CountableSfe;
use crate::error::{Error, Result};
use crate::rational::big_to_f64;

/// Finite prefix-free code indexed by `0..len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteCode {
    codewords: Vec<Codeword>,
    lookup: HashMap<(u64, BigUint), usize>,
    max_len: u64,
}

impl FiniteCode {
    pub fn new(codewords: Vec<Codeword>) -> Result<Self> {
        let code = Self::unchecked(codewords);
        if !code.is_prefix_free() {
            return Err(Error::KraftViolation("codewords are not prefix-free".into()));
        }
        Ok(code)
    }

    pub(crate) fn unchecked(codewords: Vec<Codeword>) -> Self {
        let lookup = codewords
            .iter()
            .enumerate()
            .map(|(i, c)| ((c.len(), c.value().clone()), i))
            .collect();
        let max_len = codewords.iter().map(Codeword::len).max().unwrap_or(0);
        FiniteCode { codewords, lookup, max_len }
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codeword(&self, i: usize) -> &Codeword {
        &self.codewords[i]
    }

    pub fn codewords(&self) -> &[Codeword] {
        &self.codewords
    }

    pub fn lengths(&self) -> Vec<u64> {
        self.codewords.iter().map(Codeword::len).collect()
    }

    pub fn encode(&self, i: usize, w: &mut BitWriter) {
        self.codewords[i].write(w);
    }

    pub fn decode(&self, r: &mut BitReader<'_>) -> Result<usize> {
        let mut v = BigUint::zero();
        for len in 1..=self.max_len {
            v = (v << 1usize) + u32::from(r.read_bit()?);
            if let Some(&i) = self.lookup.get(&(len, v.clone())) {
                return Ok(i);
            }
        }
        if self.max_len == 0 && self.codewords.len() == 1 {
            return Ok(0);
        }
        Err(Error::MalformedStream("no codeword matches".into()))
    }

    /// Exhaustive check: after sorting, a prefix can only precede its extensions directly.
    pub fn is_prefix_free(&self) -> bool {
        if self.codewords.len() <= 1 {
            return true;
        }
        let m = self.max_len;
        let mut keyed: Vec<(BigUint, u64, usize)> = self
            .codewords
            .iter()
            .enumerate()
            .map(|(i, c)| (c.value() << (m - c.len()) as usize, c.len(), i))
            .collect();
        keyed.sort();
        keyed.windows(2).all(|w| {
            let a = &self.codewords[w[0].2];
            let b = &self.codewords[w[1].2];
            !a.is_prefix_of(b)
        }) && self.codewords.iter().all(|c| !c.is_empty())
    }

    /// Σ 2^{−L}, exactly.
    pub fn kraft_sum(&self) -> BigRational {
        let m = self.max_len;
        let num = self
            .codewords
            .iter()
            .fold(BigUint::zero(), |acc, c| acc + (BigUint::one() << (m - c.len()) as usize));
        BigRational::new(BigInt::from(num), BigInt::from(BigUint::one() << m as usize))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KraftSum {
    Exact(BigRational),
    /// Certified upper bound for countable codes.
    UpperBound(f64),
}

impl KraftSum {
    pub fn value(&self) -> f64 {
        match self {
            KraftSum::Exact(r) => big_to_f64(r),
            KraftSum::UpperBound(b) => *b,
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            KraftSum::Exact(r) => *r <= BigRational::one(),
            KraftSum::UpperBound(b) => *b <= 1.0,
        }
    }
}

/// A finite code or a lazily evaluated CDF-based code over a countable index set.
#[derive(Debug, Clone)]
pub enum PrefixCode {
    Finite(FiniteCode),
    Countable(CountableSfe),
}

/// Kraft sum (exact for finite codes, certified bound otherwise); errors if it exceeds one.
pub fn kraft_sum(code: &PrefixCode) -> Result<KraftSum> {
    let k = match code {
        PrefixCode::Finite(c) => KraftSum::Exact(c.kraft_sum()),
        PrefixCode::Countable(c) => KraftSum::UpperBound(c.kraft_bound(c.default_horizon())?),
    };
    if !k.is_valid() {
        return Err(Error::KraftViolation(format!("{}", k.value())));
    }
    Ok(k)
}
