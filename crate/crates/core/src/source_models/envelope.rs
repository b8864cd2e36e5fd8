use super::pmf::{SourcePmf, Tail};
use crate::error::{Error, Result};
use crate::special::{hurwitz_zeta, search_first};

#[derive(Debug, Clone, PartialEq)]
pub enum EnvelopeKind {
    /// f(x) = x^{-p}.
    Polynomial { p: f64 },
    /// f(x) = scale · base^x; `exponential(K, α)` has base e^{-α}.
    Exponential { scale: f64, base: f64 },
    /// f(x) = values[x-1] for 1 ≤ x ≤ len, then the tail (zero if absent).
    Tabulated { values: Vec<f64>, tail: Option<Tail> },
}

/// Envelope function `f` inducing the family Λ_f = {μ : μ(x) ≤ f(x) ∀x}.
///
/// `f(0)` follows the analytic form (infinite for the polynomial and
/// tabulated kinds), so symbol 0 is unconstrained for those.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSpec {
    kind: EnvelopeKind,
}

impl EnvelopeSpec {
    pub fn new(kind: EnvelopeKind) -> Result<Self> {
        let ok = match &kind {
            EnvelopeKind::Polynomial { p } => p.is_finite() && *p >= 0.0,
            EnvelopeKind::Exponential { scale, base } => {
                scale.is_finite() && *scale > 0.0 && *base > 0.0 && *base <= 1.0
            }
            EnvelopeKind::Tabulated { values, tail } => {
                values.iter().all(|v| v.is_finite() && *v >= 0.0)
                    && tail.as_ref().is_none_or(|t| t.validate().is_ok())
            }
        };
        if !ok {
            return Err(Error::InvalidEnvelope(format!("{kind:?}")));
        }
        Ok(EnvelopeSpec { kind })
    }

    pub fn polynomial(p: f64) -> Result<Self> {
        Self::new(EnvelopeKind::Polynomial { p })
    }

    /// f(x) = K e^{-αx}.
    pub fn exponential(k: f64, alpha: f64) -> Result<Self> {
        Self::new(EnvelopeKind::Exponential { scale: k, base: (-alpha).exp() })
    }

    /// f(x) = r^x.
    pub fn geometric(r: f64) -> Result<Self> {
        Self::new(EnvelopeKind::Exponential { scale: 1.0, base: r })
    }

    pub fn tabulated(values: Vec<f64>, tail: Option<Tail>) -> Result<Self> {
        Self::new(EnvelopeKind::Tabulated { values, tail })
    }

    pub fn kind(&self) -> &EnvelopeKind {
        &self.kind
    }

    pub fn is_summable(&self) -> bool {
        match &self.kind {
            EnvelopeKind::Polynomial { p } => *p > 1.0,
            EnvelopeKind::Exponential { base, .. } => *base < 1.0,
            EnvelopeKind::Tabulated { tail, .. } => tail.as_ref().is_none_or(|t| t.is_summable()),
        }
    }

    pub fn eval(&self, x: u64) -> f64 {
        match &self.kind {
            EnvelopeKind::Polynomial { p } => {
                if x == 0 {
                    f64::INFINITY
                } else {
                    (x as f64).powf(-p)
                }
            }
            EnvelopeKind::Exponential { scale, base } => {
                Tail::Geometric { scale: *scale, base: *base }.eval(x)
            }
            EnvelopeKind::Tabulated { values, tail } => {
                if x == 0 {
                    f64::INFINITY
                } else if x as usize <= values.len() {
                    values[x as usize - 1]
                } else {
                    tail.as_ref().map_or(0.0, |t| t.eval(x))
                }
            }
        }
    }

    /// Analytic form of f on `x ≥ start`.
    pub fn analytic_tail(&self) -> Option<(u64, Tail)> {
        match &self.kind {
            EnvelopeKind::Polynomial { p } => {
                Some((1, Tail::PowerLaw { scale: 1.0, exponent: *p }))
            }
            EnvelopeKind::Exponential { scale, base } => {
                Some((0, Tail::Geometric { scale: *scale, base: *base }))
            }
            EnvelopeKind::Tabulated { values, tail } => {
                tail.clone().map(|t| (values.len() as u64 + 1, t))
            }
        }
    }

    /// Σ_{x ≥ k} f(x), k ≥ 1.
    pub fn suffix_sum(&self, k: u64) -> Result<f64> {
        if !self.is_summable() {
            return Err(Error::NotSummable);
        }
        let k = k.max(1);
        Ok(match &self.kind {
            EnvelopeKind::Polynomial { p } => hurwitz_zeta(*p, k),
            EnvelopeKind::Exponential { scale, base } => {
                Tail::Geometric { scale: *scale, base: *base }.suffix(k)
            }
            EnvelopeKind::Tabulated { values, tail } => {
                let len = values.len() as u64;
                let head: f64 = if k <= len {
                    values[(k - 1) as usize..].iter().rev().sum()
                } else {
                    0.0
                };
                head + tail.as_ref().map_or(0.0, |t| t.suffix(k.max(len + 1)))
            }
        })
    }

    /// τ_f = min{k ≥ 1 : Σ_{x≥k} f(x) ≤ 1}.
    pub fn tau(&self) -> Result<u64> {
        if !self.is_summable() {
            return Err(Error::NotSummable);
        }
        Ok(search_first(1, |k| self.suffix_sum(k).map(|s| s <= 1.0).unwrap_or(false)))
    }

    /// μ̃_f: f on {τ_f, …}, the leftover 1 − Σ_{x≥τ_f} f(x) at τ_f − 1.
    pub fn envelope_distribution(&self) -> Result<SourcePmf> {
        let tau = self.tau()?;
        let leftover = 1.0 - self.suffix_sum(tau)?;
        let table_end = match &self.kind {
            EnvelopeKind::Tabulated { values, .. } => values.len() as u64 + 1,
            _ => tau,
        };
        let tail_start = table_end.max(tau);
        let mut probs = Vec::new();
        let floor = if leftover > 0.0 {
            probs.push(leftover);
            tau - 1
        } else {
            tau
        };
        for x in tau..tail_start {
            probs.push(self.eval(x));
        }
        let tail = match &self.kind {
            EnvelopeKind::Polynomial { p } => Some(Tail::PowerLaw { scale: 1.0, exponent: *p }),
            EnvelopeKind::Exponential { scale, base } => {
                Some(Tail::Geometric { scale: *scale, base: *base })
            }
            EnvelopeKind::Tabulated { tail, .. } => tail.clone(),
        };
        SourcePmf::new(floor, probs, tail)
    }

    /// u_f(n) = min{k ≥ 1 : μ̃_f(T_{k+1}) < 1/n}.
    pub fn u_f(&self, n: u64) -> Result<u64> {
        let mu = self.envelope_distribution()?;
        Ok(u_f_of(&mu, n))
    }

    /// k₀(f): smallest k with μ̃_f(T_{k+1}) < 1/2.
    pub fn lemma6_threshold(&self) -> Result<u64> {
        let mu = self.envelope_distribution()?;
        Ok(search_first(1, |k| mu.mass_suffix(k + 1) < 0.5))
    }

    /// Smallest symbol beyond which Σ f < eps.
    pub fn horizon(&self, eps: f64) -> Result<u64> {
        Ok(search_first(1, |k| self.suffix_sum(k).map(|s| s < eps).unwrap_or(false)))
    }
}

pub(crate) fn u_f_of(mu: &SourcePmf, n: u64) -> u64 {
    let inv = 1.0 / n as f64;
    search_first(1, |k| mu.mass_suffix(k + 1) < inv)
}
