//! Shannon–Fano–Elias codes with lengths ⌈log₂ 1/q⌉ + 1.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::bits::{BitReader, BitWriter, Codeword};
use super::prefix::{FiniteCode, PrefixCode};
use crate::error::{Error, Result};
use crate::rational::ceil_log2_ratio;
use crate::source_models::SourcePmf;

/// Finite SFE code for strictly positive integer weights.
pub fn sfe_from_weights(weights: &[BigUint]) -> Result<FiniteCode> {
    if let Some(i) = weights.iter().position(Zero::is_zero) {
        return Err(Error::ZeroProbabilitySymbol(i as u64));
    }
    let total: BigUint = weights.iter().sum();
    let two_n = &total << 1usize;
    let mut prefix = BigUint::zero();
    let mut words = Vec::with_capacity(weights.len());
    for s in weights {
        let len = (ceil_log2_ratio(&total, s) + 1) as u64;
        let num = ((&prefix << 1usize) + s) << len as usize;
        words.push(Codeword::new(num / &two_n, len));
        prefix += s;
    }
    Ok(FiniteCode::unchecked(words))
}

/// Finite SFE code for probabilities given as doubles (converted exactly).
pub fn sfe_from_probs(probs: &[f64]) -> Result<FiniteCode> {
    if let Some(i) = probs.iter().position(|&p| !(p > 0.0)) {
        return Err(Error::ZeroProbabilitySymbol(i as u64));
    }
    let dy: Vec<(u64, i64)> = probs.iter().map(|&p| dyadic(p)).collect();
    let emin = dy.iter().map(|d| d.1).min().unwrap_or(0);
    let weights: Vec<BigUint> =
        dy.iter().map(|&(m, e)| BigUint::from(m) << (e - emin) as usize).collect();
    sfe_from_weights(&weights)
}

/// x = m · 2^e for a finite nonnegative double.
fn dyadic(x: f64) -> (u64, i64) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    }
}

/// Index model with a closed-form suffix function S(i) = Σ_{j ≥ i} q(j), S(0) = 1.
pub trait IndexModel: Send + Sync + std::fmt::Debug {
    fn suffix(&self, i: u64) -> f64;
    fn log2_suffix(&self, i: u64) -> f64;
    fn log2_prob(&self, i: u64) -> f64;
    /// Alphabet size when finite.
    fn size(&self) -> Option<u64> {
        None
    }
}

/// Model for a [`SourcePmf`] with index i ↔ symbol floor + i.
#[derive(Debug, Clone)]
pub struct PmfModel {
    pmf: SourcePmf,
}

impl PmfModel {
    pub fn new(pmf: SourcePmf) -> Self {
        PmfModel { pmf }
    }
}

impl IndexModel for PmfModel {
    fn suffix(&self, i: u64) -> f64 {
        if i == 0 {
            1.0
        } else {
            self.pmf.mass_suffix(self.pmf.floor() + i)
        }
    }
    fn log2_suffix(&self, i: u64) -> f64 {
        self.pmf.log2_mass_suffix(self.pmf.floor() + i)
    }
    fn log2_prob(&self, i: u64) -> f64 {
        self.pmf.log2_prob(self.pmf.floor() + i)
    }
    fn size(&self) -> Option<u64> {
        self.pmf.support_max().map(|m| m - self.pmf.floor() + 1)
    }
}

/// Suffix masses below this switch the codeword rule to the log domain.
const EXACT_FLOOR: f64 = 1e-280;

/// SFE code over a countable index set, evaluated lazily from the model's CDF.
///
/// Intervals are [1 − S(i), 1 − S(i+1)) with S evaluated in floating point, so
/// consecutive intervals are exactly contiguous and the code is prefix-free by
/// construction wherever the exact rule applies.
#[derive(Debug, Clone)]
pub struct CountableSfe {
    model: Arc<dyn IndexModel>,
}

impl CountableSfe {
    pub fn new(model: Arc<dyn IndexModel>) -> Self {
        CountableSfe { model }
    }

    pub fn model(&self) -> &dyn IndexModel {
        self.model.as_ref()
    }

    pub fn codeword(&self, i: u64) -> Result<Codeword> {
        if let Some(m) = self.model.size() {
            if i >= m {
                return Err(Error::ZeroProbabilitySymbol(i));
            }
        }
        let s0 = self.model.suffix(i);
        let s1 = if self.model.size() == Some(i + 1) { 0.0 } else { self.model.suffix(i + 1) };
        if s1 >= EXACT_FLOOR || (s1 == 0.0 && s0 >= EXACT_FLOOR) {
            if !(s0 > s1) {
                return Err(Error::ZeroProbabilitySymbol(i));
            }
            return Ok(exact_codeword(s0, s1));
        }
        self.log_codeword(i)
    }

    fn log_codeword(&self, i: u64) -> Result<Codeword> {
        let lq = self.model.log2_prob(i);
        if !lq.is_finite() {
            return Err(Error::ZeroProbabilitySymbol(i));
        }
        let len = (-lq).ceil().max(0.0) as u64 + 1;
        let ls = self.model.log2_suffix(i + 1);
        let ratio = if ls.is_finite() { (ls - lq).exp2() } else { 0.0 };
        // G·2^L with G = S(i+1) + q/2, a small number since 2^L·q ∈ [2, 4).
        let g = ((len as f64 + lq).exp2() * (ratio + 0.5)).ceil();
        let g = BigUint::from(g.to_u64().unwrap_or(u64::MAX));
        let top = BigUint::one() << len as usize;
        if g >= top {
            return Err(Error::ZeroProbabilitySymbol(i));
        }
        Ok(Codeword::new(top - g, len))
    }

    pub fn length(&self, i: u64) -> Result<u64> {
        Ok(self.codeword(i)?.len())
    }

    pub fn encode(&self, i: u64, w: &mut BitWriter) -> Result<()> {
        self.codeword(i)?.write(w);
        Ok(())
    }

    /// Finds the index whose interval contains the stream value by bisection.
    pub fn decode(&self, r: &mut BitReader<'_>) -> Result<u64> {
        let starts_at_or_before = |i: u64| -> Result<bool> {
            let c = self.codeword(i)?;
            Ok(r.peek_big(c.len()) >= *c.value())
        };
        let mut lo = 0u64;
        let mut hi = match self.model.size() {
            Some(m) => m,
            None => {
                let mut step = 1u64;
                loop {
                    let cand = lo.saturating_add(step);
                    match starts_at_or_before(cand) {
                        Ok(true) => {
                            lo = cand;
                            step = step.saturating_mul(2);
                        }
                        Ok(false) => break cand,
                        Err(_) => break cand,
                    }
                    if step > (1 << 60) {
                        return Err(Error::MalformedStream("index search diverged".into()));
                    }
                }
            }
        };
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if starts_at_or_before(mid).unwrap_or(false) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c = self.codeword(lo)?;
        if r.remaining() < c.len() || r.peek_big(c.len()) != *c.value() {
            return Err(Error::MalformedStream("no codeword matches".into()));
        }
        r.skip(c.len())?;
        Ok(lo)
    }

    /// First index with S(i) below 1e-12 (capped).
    pub fn default_horizon(&self) -> u64 {
        let cap = self.model.size().unwrap_or(1 << 20);
        crate::special::search_first(0, |i| i >= cap || self.model.suffix(i) < 1e-12).min(cap)
    }

    /// Σ_{i<H} 2^{−L(i)} + S(H)/2, an upper bound on the Kraft sum.
    pub fn kraft_bound(&self, horizon: u64) -> Result<f64> {
        let mut sum = 0.0;
        for i in 0..horizon {
            sum += (-(self.length(i)? as f64)).exp2();
        }
        let tail = if self.model.size().is_some_and(|m| horizon >= m) {
            0.0
        } else {
            self.model.suffix(horizon) / 2.0
        };
        Ok(sum + tail)
    }

    /// Consecutive codeword intervals are disjoint and increasing up to `horizon`.
    pub fn certify_prefix_free(&self, horizon: u64) -> Result<bool> {
        let mut prev: Option<Codeword> = None;
        for i in 0..horizon {
            let c = self.codeword(i)?;
            if let Some(p) = &prev {
                // end(p) ≤ start(c) ⇔ (p+1)·2^{Lc} ≤ c·2^{Lp}
                let lhs = (p.value() + 1u32) << c.len() as usize;
                let rhs = c.value() << p.len() as usize;
                if lhs > rhs {
                    return Ok(false);
                }
            }
            prev = Some(c);
        }
        Ok(true)
    }
}

fn exact_codeword(s0: f64, s1: f64) -> Codeword {
    let (m0, e0) = dyadic(s0);
    let (m1, e1) = dyadic(s1);
    let emin = if s1 == 0.0 { e0 } else { e0.min(e1) };
    let e = (-emin).max(0) as usize;
    let shift0 = (e0 - emin) as usize;
    let shift1 = (e1 - emin).max(0) as usize;
    let a = BigUint::from(m0) << shift0;
    let b = if s1 == 0.0 { BigUint::zero() } else { BigUint::from(m1) << shift1 };
    // Scale so S·2^E is integral with E ≥ 0: values are a·2^{emin}.
    let (a, b, e) = if emin > 0 {
        (a << emin as usize, b << emin as usize, 0usize)
    } else {
        (a, b, e)
    };
    let diff = &a - &b;
    let len = (e as u64 + 2).saturating_sub(diff.bits());
    let len = len.max(1);
    let top = BigUint::one() << (e + 1);
    let num = top - (&a + &b);
    let shift = (e as u64 + 1).saturating_sub(len);
    let value = if e as u64 + 1 >= len {
        num >> shift as usize
    } else {
        num << (len - e as u64 - 1) as usize
    };
    Codeword::new(value, len)
}

/// SFE code for a pmf: finite support gives a finite code over `floor..=max`.
pub fn sfe_code(q: &SourcePmf) -> Result<PrefixCode> {
    match q.support_max() {
        Some(_) => Ok(PrefixCode::Finite(sfe_from_probs(q.probs())?)),
        None => Ok(PrefixCode::Countable(CountableSfe::new(Arc::new(PmfModel::new(q.clone()))))),
    }
}
