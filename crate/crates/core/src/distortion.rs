//! Single-letter and block distortions with exact rational values.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistortionKind {
    /// ρ(i,j) = |i − j|.
    Absolute,
    /// ρ_M(i,j) = scale · min{|i − j|, cap}.
    Bounded { scale: Rational, cap: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistortionSpec {
    kind: DistortionKind,
}

impl DistortionSpec {
    pub fn absolute() -> Self {
        DistortionSpec { kind: DistortionKind::Absolute }
    }

    pub fn bounded(scale: Rational, cap: u64) -> Result<Self> {
        if !scale.is_positive() || cap == 0 {
            return Err(Error::InvalidDistortion(format!(
                "bounded distortion needs K > 0 and M >= 1, got K = {}, M = {cap}",
                format_rational(&scale)
            )));
        }
        Ok(DistortionSpec { kind: DistortionKind::Bounded { scale, cap } })
    }

    pub fn kind(&self) -> DistortionKind {
        self.kind
    }

    /// ρ_max, when finite.
    pub fn rho_max(&self) -> Option<Rational> {
        match self.kind {
            DistortionKind::Absolute => None,
            DistortionKind::Bounded { scale, cap } => Some(scale * Rational::from(cap as i128)),
        }
    }

    /// Distortion as a function of |i − j|.
    pub fn of_gap(&self, gap: u64) -> Rational {
        match self.kind {
            DistortionKind::Absolute => Rational::from(gap as i128),
            DistortionKind::Bounded { scale, cap } => scale * Rational::from(gap.min(cap) as i128),
        }
    }

    pub fn rho(&self, i: u64, j: u64) -> Rational {
        self.of_gap(i.abs_diff(j))
    }

    /// ρ_n(x, y) = (1/n) Σ ρ(x_i, y_i).
    pub fn rho_block(&self, x: &[u64], y: &[u64]) -> Result<Rational> {
        self.block_with(x, y, |a, b| self.rho(a, b))
    }

    /// ρ^k: ρ on Γ_k², 0 outside on both sides, ρ(i, k+1) across.
    pub fn rho_truncated(&self, k: u64, i: u64, j: u64) -> Rational {
        match (i <= k, j <= k) {
            (true, true) => self.rho(i, j),
            (false, false) => Rational::zero(),
            (true, false) => self.rho(i, k + 1),
            (false, true) => self.rho(k + 1, j),
        }
    }

    pub fn rho_truncated_block(&self, k: u64, x: &[u64], y: &[u64]) -> Result<Rational> {
        self.block_with(x, y, |a, b| self.rho_truncated(k, a, b))
    }

    /// Sum of letter distortions, without the 1/n factor.
    pub fn sum_with(&self, x: &[u64], y: &[u64], f: impl Fn(u64, u64) -> Rational) -> Result<Rational> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(x.len(), y.len()));
        }
        Ok(x.iter().zip(y).fold(Rational::zero(), |acc, (&a, &b)| acc + f(a, b)))
    }

    fn block_with(&self, x: &[u64], y: &[u64], f: impl Fn(u64, u64) -> Rational) -> Result<Rational> {
        let s = self.sum_with(x, y, f)?;
        if x.is_empty() {
            return Ok(Rational::zero());
        }
        Ok(s / Rational::from(x.len() as i128))
    }

    /// ε such that |i − j| ≥ ε implies ρ(i, j) ≥ level.
    pub fn consistency_epsilon(&self, level: Rational) -> Result<Rational> {
        if !level.is_positive() {
            return Err(Error::InvalidDistortion("level must be positive".into()));
        }
        match self.kind {
            DistortionKind::Absolute => Ok(level),
            DistortionKind::Bounded { scale, .. } => {
                let max = self.rho_max().unwrap();
                if level > max {
                    return Err(Error::LevelOutOfRange(format_rational(&level), format_rational(&max)));
                }
                Ok(level / scale)
            }
        }
    }

    /// Checks the ε certificate for every i in `window` and every j within 2ε of i.
    pub fn verify_consistency(&self, level: Rational, window: std::ops::RangeInclusive<u64>) -> Result<bool> {
        let eps = self.consistency_epsilon(level)?;
        let reach = (eps * Rational::from(2)).ceil().to_integer().max(1) as u64;
        for i in window {
            for j in i.saturating_sub(reach)..=i.saturating_add(reach) {
                let gap = Rational::from(i.abs_diff(j) as i128);
                if gap >= eps && self.rho(i, j) < level {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Largest integer gap g with ρ(g) ≤ d.
    pub fn covering_radius(&self, d: Rational) -> u64 {
        match self.kind {
            DistortionKind::Absolute => d.floor().to_integer().max(0) as u64,
            DistortionKind::Bounded { scale, cap } => {
                if scale * Rational::from(cap as i128) <= d {
                    u64::MAX
                } else {
                    (d / scale).floor().to_integer().max(0) as u64
                }
            }
        }
    }
}

/// Distortion level d > 0 (and d < ρ_max for bounded kinds).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistortionLevel {
    d: Rational,
}

impl DistortionLevel {
    pub fn new(d: Rational, spec: &DistortionSpec) -> Result<Self> {
        if !d.is_positive() {
            return Err(Error::InvalidDistortion(format!("d = {} must be positive", format_rational(&d))));
        }
        if let Some(max) = spec.rho_max() {
            if d >= max {
                return Err(Error::LevelOutOfRange(format_rational(&d), format_rational(&max)));
            }
        }
        Ok(DistortionLevel { d })
    }

    pub fn value(&self) -> Rational {
        self.d
    }
}
