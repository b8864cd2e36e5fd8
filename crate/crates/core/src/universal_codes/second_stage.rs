//! Lossless coding of the overflow sequence O_k(xⁿ) under the envelope distribution.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::bits::{elias_gamma_read, elias_gamma_write, BitReader, BitWriter};
use super::combinatorics::{binomial, subset_rank, subset_unrank};
use super::prefix::PrefixCode;
use super::sfe::{CountableSfe, IndexModel};
use crate::error::{Error, Result};
use crate::rational::ceil_log2_u;
use crate::source_models::{EnvelopeSpec, SourcePmf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SecondStageMode {
    /// One SFE codeword per symbol under m_{μ̃_f,k}.
    PerSymbol,
    /// Overflow count, positions, then SFE codewords of the overflow symbols.
    Enumerative,
}

impl SecondStageMode {
    pub fn id(self) -> u8 {
        match self {
            SecondStageMode::PerSymbol => 0,
            SecondStageMode::Enumerative => 1,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            0 => Ok(SecondStageMode::PerSymbol),
            1 => Ok(SecondStageMode::Enumerative),
            _ => Err(Error::MalformedStream(format!("unknown second-stage mode {id}"))),
        }
    }
}

impl fmt::Display for SecondStageMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SecondStageMode::PerSymbol => "per-symbol",
            SecondStageMode::Enumerative => "enumerative",
        })
    }
}

impl FromStr for SecondStageMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-symbol" | "static-envelope" => Ok(SecondStageMode::PerSymbol),
            "enumerative" => Ok(SecondStageMode::Enumerative),
            _ => Err(Error::ConfigInvalid(format!("unknown second-stage mode '{s}'"))),
        }
    }
}

/// m_{μ,k}: mass μ(Γ_k) on the marker 1, μ(x) on each x > k.
pub fn overflow_image(mu: &SourcePmf, k: u64) -> Result<SourcePmf> {
    let head = 1.0 - mu.mass_suffix(k + 1);
    let end = mu.explicit_end().max(k + 1);
    let mut probs = vec![0.0; (end - 1) as usize];
    probs[0] = head;
    for x in k + 1..end {
        probs[(x - 1) as usize] = mu.prob(x);
    }
    // Any analytic tail starts at or before k + 1 here, so it carries over unchanged.
    SourcePmf::new(1, probs, mu.tail().cloned())
}

/// Index 0 is the marker, index j ≥ 1 is symbol k + j.
#[derive(Debug)]
struct MarkerModel {
    mu: SourcePmf,
    k: u64,
}

impl IndexModel for MarkerModel {
    fn suffix(&self, i: u64) -> f64 {
        if i == 0 { 1.0 } else { self.mu.mass_suffix(self.k + i) }
    }
    fn log2_suffix(&self, i: u64) -> f64 {
        if i == 0 { 0.0 } else { self.mu.log2_mass_suffix(self.k + i) }
    }
    fn log2_prob(&self, i: u64) -> f64 {
        if i == 0 {
            (-self.mu.mass_suffix(self.k + 1)).ln_1p() / std::f64::consts::LN_2
        } else {
            self.mu.log2_prob(self.k + i)
        }
    }
}

/// μ̃ conditioned on {x > k}: index i is symbol k + 1 + i.
#[derive(Debug)]
struct OverflowModel {
    mu: SourcePmf,
    k: u64,
    log2_norm: f64,
    norm: f64,
}

impl IndexModel for OverflowModel {
    fn suffix(&self, i: u64) -> f64 {
        if i == 0 { 1.0 } else { self.mu.mass_suffix(self.k + 1 + i) / self.norm }
    }
    fn log2_suffix(&self, i: u64) -> f64 {
        self.mu.log2_mass_suffix(self.k + 1 + i) - self.log2_norm
    }
    fn log2_prob(&self, i: u64) -> f64 {
        self.mu.log2_prob(self.k + 1 + i) - self.log2_norm
    }
}

/// Static-envelope lossless coder for zⁿ = O_k(xⁿ).
#[derive(Debug, Clone)]
pub struct SecondStage {
    k: u64,
    mode: SecondStageMode,
    envelope: SourcePmf,
    marker: CountableSfe,
    overflow: CountableSfe,
}

impl SecondStage {
    pub fn new(env: &EnvelopeSpec, k: u64, mode: SecondStageMode) -> Result<Self> {
        if !env.is_summable() {
            return Err(Error::NotSummable);
        }
        let mu = env.envelope_distribution()?;
        Self::from_distribution(mu, k, mode)
    }

    /// Coder under an arbitrary coding distribution with full support above its floor.
    pub fn from_distribution(mu: SourcePmf, k: u64, mode: SecondStageMode) -> Result<Self> {
        if k == 0 || k < mu.floor() {
            return Err(Error::ConfigInvalid(format!(
                "threshold k = {k} must be >= 1 and >= the envelope support floor {}",
                mu.floor()
            )));
        }
        if mu.support_max().is_some_and(|m| m <= k) {
            return Err(Error::ConfigInvalid("coding distribution has no mass above k".into()));
        }
        let norm = mu.mass_suffix(k + 1);
        let marker = CountableSfe::new(Arc::new(MarkerModel { mu: mu.clone(), k }));
        let overflow = CountableSfe::new(Arc::new(OverflowModel {
            mu: mu.clone(),
            k,
            log2_norm: mu.log2_mass_suffix(k + 1),
            norm,
        }));
        Ok(SecondStage { k, mode, envelope: mu, marker, overflow })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn mode(&self) -> SecondStageMode {
        self.mode
    }

    pub fn envelope_distribution(&self) -> &SourcePmf {
        &self.envelope
    }

    /// The per-symbol code over {1} ∪ Γ_k^c (indexed by marker, k+1, k+2, …).
    pub fn code(&self) -> PrefixCode {
        PrefixCode::Countable(self.marker.clone())
    }

    /// The code for overflow symbols in enumerative mode (index i ↔ k+1+i).
    pub fn overflow_code(&self) -> PrefixCode {
        PrefixCode::Countable(self.overflow.clone())
    }

    fn marker_index(&self, z: u64) -> Result<u64> {
        match z {
            1 => Ok(0),
            z if z > self.k => Ok(z - self.k),
            z => Err(Error::InvalidOverflowSymbol(z)),
        }
    }

    /// Codeword length of one overflow-sequence symbol in per-symbol mode.
    pub fn symbol_length(&self, z: u64) -> Result<u64> {
        self.marker.length(self.marker_index(z)?)
    }

    pub fn encode(&self, z: &[u64], w: &mut BitWriter) -> Result<()> {
        match self.mode {
            SecondStageMode::PerSymbol => {
                for &s in z {
                    self.marker.encode(self.marker_index(s)?, w)?;
                }
            }
            SecondStageMode::Enumerative => {
                let n = z.len() as u64;
                let mut pos = Vec::new();
                for (i, &s) in z.iter().enumerate() {
                    if self.marker_index(s)? > 0 {
                        pos.push(i as u64);
                    }
                }
                let m = pos.len() as u64;
                elias_gamma_write(w, m + 1);
                w.write_big(&subset_rank(&pos), ceil_log2_u(&binomial(n, m)));
                for &p in &pos {
                    self.overflow.encode(z[p as usize] - self.k - 1, w)?;
                }
            }
        }
        Ok(())
    }

    pub fn decode(&self, n: usize, r: &mut BitReader<'_>) -> Result<Vec<u64>> {
        match self.mode {
            SecondStageMode::PerSymbol => (0..n)
                .map(|_| {
                    let i = self.marker.decode(r)?;
                    Ok(if i == 0 { 1 } else { self.k + i })
                })
                .collect(),
            SecondStageMode::Enumerative => {
                let m = elias_gamma_read(r)? - 1;
                if m > n as u64 {
                    return Err(Error::MalformedStream("more overflow symbols than positions".into()));
                }
                let rank = r.read_big(ceil_log2_u(&binomial(n as u64, m)))?;
                let pos = subset_unrank(rank, m, n as u64)
                    .ok_or_else(|| Error::MalformedStream("position rank out of range".into()))?;
                let mut z = vec![1u64; n];
                for p in pos {
                    z[p as usize] = self.k + 1 + self.overflow.decode(r)?;
                }
                Ok(z)
            }
        }
    }
}
