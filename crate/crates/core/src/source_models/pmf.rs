use crate::error::{Error, Result};
use crate::special::{
    geometric_first_moment, hurwitz_zeta, log_power_sum, plogp, powi_u, search_first,
};

/// Closed-form tail `mass(x)` for all `x ≥ start`.
#[derive(Debug, Clone, PartialEq)]
pub enum Tail {
    /// `scale · base^x`, 0 < base < 1.
    Geometric { scale: f64, base: f64 },
    /// `scale · x^(-exponent)`, exponent > 1.
    PowerLaw { scale: f64, exponent: f64 },
}

impl Tail {
    pub fn eval(&self, x: u64) -> f64 {
        match *self {
            Tail::Geometric { scale, base } => scale * powi_u(base, x),
            Tail::PowerLaw { scale, exponent } => {
                if x == 0 {
                    f64::INFINITY
                } else {
                    scale * (x as f64).powf(-exponent)
                }
            }
        }
    }

    pub fn log2_eval(&self, x: u64) -> f64 {
        match *self {
            Tail::Geometric { scale, base } => scale.log2() + x as f64 * base.log2(),
            Tail::PowerLaw { scale, exponent } => scale.log2() - exponent * (x as f64).log2(),
        }
    }

    pub fn is_summable(&self) -> bool {
        match *self {
            Tail::Geometric { base, .. } => base < 1.0,
            Tail::PowerLaw { exponent, .. } => exponent > 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Tail::Geometric { scale, base } => scale >= 0.0 && base > 0.0 && base.is_finite(),
            Tail::PowerLaw { scale, exponent } => scale >= 0.0 && exponent.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPmf(format!("bad tail {self:?}")))
        }
    }

    /// Σ_{x ≥ k} mass(x); infinite when not summable.
    pub fn suffix(&self, k: u64) -> f64 {
        if !self.is_summable() {
            return f64::INFINITY;
        }
        match *self {
            Tail::Geometric { scale, base } => scale * powi_u(base, k) / (1.0 - base),
            Tail::PowerLaw { scale, exponent } => {
                if k == 0 {
                    f64::INFINITY
                } else {
                    scale * hurwitz_zeta(exponent, k)
                }
            }
        }
    }

    /// log₂ Σ_{x ≥ k} mass(x), accurate where the suffix underflows.
    pub fn log2_suffix(&self, k: u64) -> f64 {
        match *self {
            Tail::Geometric { scale, base } => {
                scale.log2() + k as f64 * base.log2() - (1.0 - base).log2()
            }
            Tail::PowerLaw { .. } => self.suffix(k).log2(),
        }
    }

    /// Σ_{x ≥ k} −mass(x) log₂ mass(x).
    pub fn suffix_entropy(&self, k: u64) -> Result<f64> {
        if !self.is_summable() {
            return Err(Error::DivergentEntropy);
        }
        let ln2 = std::f64::consts::LN_2;
        Ok(match *self {
            Tail::Geometric { scale, base } => {
                if scale == 0.0 {
                    return Ok(0.0);
                }
                let mass = self.suffix(k);
                let moment = scale * geometric_first_moment(base, k);
                -(mass * scale.log2() + moment * base.log2())
            }
            Tail::PowerLaw { scale, exponent } => {
                if scale == 0.0 {
                    return Ok(0.0);
                }
                let k = k.max(1);
                let mass = scale * hurwitz_zeta(exponent, k);
                let lsum = scale * log_power_sum(exponent, k);
                exponent * lsum / ln2 - mass * scale.log2()
            }
        })
    }

    /// Σ_{x ≥ k} x·mass(x) when finite.
    fn suffix_mean(&self, k: u64) -> Option<f64> {
        match *self {
            Tail::Geometric { scale, base } => {
                (base < 1.0).then(|| scale * geometric_first_moment(base, k))
            }
            Tail::PowerLaw { scale, exponent } => {
                (exponent > 2.0).then(|| scale * hurwitz_zeta(exponent - 1.0, k.max(1)))
            }
        }
    }
}

/// Probability mass function on the nonnegative integers.
///
/// Explicit masses cover `floor..floor+probs.len()`; the optional tail covers
/// every symbol from there on.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePmf {
    floor: u64,
    probs: Vec<f64>,
    tail: Option<Tail>,
}

/// A finite symbol set or a suffix `T_k = {k, k+1, …}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolSet {
    Finite(Vec<u64>),
    Suffix(u64),
}

const MASS_TOL: f64 = 1e-12;

impl SourcePmf {
    pub fn new(floor: u64, probs: Vec<f64>, tail: Option<Tail>) -> Result<Self> {
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidPmf("negative or non-finite mass".into()));
        }
        if let Some(t) = &tail {
            t.validate()?;
            if !t.is_summable() {
                return Err(Error::InvalidPmf("tail is not summable".into()));
            }
        }
        let pmf = SourcePmf { floor, probs, tail };
        let total = pmf.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidPmf(format!("total mass {total} differs from 1")));
        }
        Ok(pmf)
    }

    /// Explicit finite-support pmf; masses are renormalized when they sum to 1 within 1e-9.
    pub fn from_probs(floor: u64, probs: Vec<f64>) -> Result<Self> {
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidPmf(format!("total mass {total} differs from 1")));
        }
        let probs = if total == 1.0 {
            probs
        } else {
            probs.iter().map(|p| p / total).collect()
        };
        Self::new(floor, probs, None)
    }

    pub fn point_mass(x: u64) -> Self {
        SourcePmf { floor: x, probs: vec![1.0], tail: None }
    }

    pub fn uniform(lo: u64, hi: u64) -> Self {
        let m = (hi - lo + 1) as f64;
        SourcePmf { floor: lo, probs: vec![1.0 / m; (hi - lo + 1) as usize], tail: None }
    }

    /// μ(x) = (1−r) r^{x−1} for x ≥ 1.
    pub fn geometric(r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidPmf(format!("ratio {r} outside (0,1)")));
        }
        Self::new(1, vec![], Some(Tail::Geometric { scale: (1.0 - r) / r, base: r }))
    }

    pub fn floor(&self) -> u64 {
        self.floor
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail(&self) -> Option<&Tail> {
        self.tail.as_ref()
    }

    /// First symbol covered by the tail (or one past the explicit support).
    pub fn explicit_end(&self) -> u64 {
        self.floor + self.probs.len() as u64
    }

    /// Largest symbol with positive mass, if the support is finite.
    pub fn support_max(&self) -> Option<u64> {
        if self.tail.is_some() {
            return None;
        }
        self.probs
            .iter()
            .rposition(|&p| p > 0.0)
            .map(|i| self.floor + i as u64)
    }

    pub fn prob(&self, x: u64) -> f64 {
        if x < self.floor {
            0.0
        } else if x < self.explicit_end() {
            self.probs[(x - self.floor) as usize]
        } else {
            self.tail.as_ref().map_or(0.0, |t| t.eval(x))
        }
    }

    pub fn log2_prob(&self, x: u64) -> f64 {
        if x >= self.explicit_end() {
            if let Some(t) = &self.tail {
                return t.log2_eval(x);
            }
        }
        self.prob(x).log2()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass_suffix(0)
    }

    /// μ(T_k).
    pub fn mass_suffix(&self, k: u64) -> f64 {
        let end = self.explicit_end();
        let start = k.max(self.floor);
        let explicit: f64 = if start < end {
            self.probs[(start - self.floor) as usize..].iter().rev().sum()
        } else {
            0.0
        };
        let tail = self.tail.as_ref().map_or(0.0, |t| t.suffix(start.max(end)));
        explicit + tail
    }

    pub fn log2_mass_suffix(&self, k: u64) -> f64 {
        if k >= self.explicit_end() {
            if let Some(t) = &self.tail {
                return t.log2_suffix(k);
            }
        }
        self.mass_suffix(k).log2()
    }

    /// μ({lo, …, hi}).
    pub fn mass_range(&self, lo: u64, hi: u64) -> f64 {
        if hi < lo {
            return 0.0;
        }
        let end = self.explicit_end();
        if hi < end || self.tail.is_none() {
            return (lo.max(self.floor)..=hi.min(end.saturating_sub(1)))
                .map(|x| self.prob(x))
                .sum();
        }
        let head: f64 = (lo.max(self.floor)..end.max(lo)).map(|x| self.prob(x)).sum();
        let t = self.tail.as_ref().unwrap();
        let from = lo.max(end);
        head + (t.suffix(from) - t.suffix(hi + 1))
    }

    pub fn mass(&self, set: &SymbolSet) -> f64 {
        match set {
            SymbolSet::Finite(xs) => {
                let mut v = xs.clone();
                v.sort_unstable();
                v.dedup();
                v.iter().map(|&x| self.prob(x)).sum()
            }
            SymbolSet::Suffix(k) => self.mass_suffix(*k),
        }
    }

    /// Σ_{x ≥ k} −μ(x) log₂ μ(x).
    pub fn entropy_from(&self, k: u64) -> Result<f64> {
        let end = self.explicit_end();
        let start = k.max(self.floor);
        let explicit: f64 = if start < end {
            self.probs[(start - self.floor) as usize..]
                .iter()
                .map(|&p| plogp(p))
                .sum()
        } else {
            0.0
        };
        let tail = match &self.tail {
            Some(t) => t.suffix_entropy(start.max(end))?,
            None => 0.0,
        };
        Ok(explicit + tail)
    }

    pub fn mean(&self) -> Option<f64> {
        let end = self.explicit_end();
        let explicit: f64 = (self.floor..end).map(|x| x as f64 * self.prob(x)).sum();
        match &self.tail {
            Some(t) => t.suffix_mean(end).map(|m| m + explicit),
            None => Some(explicit),
        }
    }

    /// Smallest symbol `h` with μ(T_h) ≤ eps.
    pub fn horizon(&self, eps: f64) -> u64 {
        search_first(self.floor, |x| self.mass_suffix(x) <= eps)
    }

    /// Image under S_k: explicit pmf on {floor, …, k+1}.
    pub fn truncated(&self, k: u64) -> SourcePmf {
        let lo = self.floor.min(k + 1);
        let mut probs: Vec<f64> = (lo..=k).map(|x| self.prob(x)).collect();
        probs.push(self.mass_suffix(k + 1));
        SourcePmf { floor: lo, probs, tail: None }
    }

    /// Restriction to `{lo, …, hi}` as an explicit table.
    pub fn window(&self, lo: u64, hi: u64) -> Vec<f64> {
        (lo..=hi).map(|x| self.prob(x)).collect()
    }
}

pub fn pmf_mass(pmf: &SourcePmf, set: &SymbolSet) -> f64 {
    pmf.mass(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_suffix_masses() {
        let g = SourcePmf::geometric(0.5).unwrap();
        assert_eq!(g.mass(&SymbolSet::Suffix(4)), 0.125);
        assert_eq!(g.mass(&SymbolSet::Finite(vec![])), 0.0);
        assert_eq!(g.mass(&SymbolSet::Finite(vec![1, 2])), 0.75);
        assert_eq!(g.prob(0), 0.0);
        assert_eq!(g.prob(3), 0.125);
        assert!((g.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_examples() {
        let u = SourcePmf::uniform(1, 4);
        assert!((u.entropy_from(0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(SourcePmf::point_mass(7).entropy_from(0).unwrap(), 0.0);
        let g = SourcePmf::geometric(0.5).unwrap();
        assert!((g.entropy_from(0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn power_law_tail_entropy_matches_partial_sums() {
        let z = hurwitz_zeta(3.0, 1);
        let pmf = SourcePmf::new(1, vec![], Some(Tail::PowerLaw { scale: 1.0 / z, exponent: 3.0 }))
            .unwrap();
        let direct: f64 = (1..2_000_000u64)
            .map(|x| plogp((x as f64).powi(-3) / z))
            .sum();
        assert!((pmf.entropy_from(1).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(SourcePmf::new(0, vec![0.5, 0.4], None).is_err());
        assert!(SourcePmf::new(0, vec![-0.5, 1.5], None).is_err());
        assert!(SourcePmf::from_probs(0, vec![0.5, 0.5 + 1e-10]).is_ok());
    }

    #[test]
    fn truncation_image() {
        let g = SourcePmf::geometric(0.5).unwrap();
        let t = g.truncated(3);
        assert_eq!(t.floor(), 1);
        assert_eq!(t.probs(), &[0.5, 0.25, 0.125, 0.125]);
    }

    #[test]
    fn ranges_and_horizon() {
        let g = SourcePmf::geometric(0.5).unwrap();
        assert!((g.mass_range(2, 4) - 0.4375).abs() < 1e-15);
        assert_eq!(g.horizon(1.0 / 16.0), 5);
        assert_eq!(g.mean(), Some(2.0));
    }
}
