use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::distortion::DistortionSpec;
use crate::error::{Error, Result};
use crate::rational::{f64_to_big, Rational};
use crate::source_models::SourcePmf;

/// Largest probability mass a window may drop before renormalization.
pub const WINDOW_MASS_TOLERANCE: f64 = 1e-9;

/// Letter distortion of an oracle instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceDistortion {
    Plain(DistortionSpec),
    /// ρ^k, which identifies every symbol above k.
    Truncated(DistortionSpec, u64),
}

impl InstanceDistortion {
    pub fn spec(&self) -> DistortionSpec {
        match *self {
            InstanceDistortion::Plain(s) | InstanceDistortion::Truncated(s, _) => s,
        }
    }

    pub fn rho(&self, i: u64, j: u64) -> Rational {
        match *self {
            InstanceDistortion::Plain(s) => s.rho(i, j),
            InstanceDistortion::Truncated(s, k) => s.rho_truncated(k, i, j),
        }
    }

    pub fn rho_block(&self, x: &[u64], y: &[u64]) -> Result<Rational> {
        match *self {
            InstanceDistortion::Plain(s) => s.rho_block(x, y),
            InstanceDistortion::Truncated(s, k) => s.rho_truncated_block(k, x, y),
        }
    }
}

impl From<DistortionSpec> for InstanceDistortion {
    fn from(s: DistortionSpec) -> Self {
        InstanceDistortion::Plain(s)
    }
}

/// A pmf restricted to a finite window, with block length, distortion and level.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteInstance {
    window: Vec<u64>,
    probs: Vec<BigRational>,
    n: usize,
    distortion: InstanceDistortion,
    d: Rational,
}

impl FiniteInstance {
    pub fn new(
        window: Vec<u64>,
        probs: &[f64],
        n: usize,
        distortion: impl Into<InstanceDistortion>,
        d: Rational,
    ) -> Result<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidPmf("window probabilities must be finite and nonnegative".into()));
        }
        let exact: Vec<BigRational> = probs.iter().map(|&p| f64_to_big(p)).collect();
        Self::from_exact(window, exact, n, distortion.into(), d)
    }

    /// Restriction of `pmf` to `window`.
    pub fn from_pmf(
        pmf: &SourcePmf,
        window: Vec<u64>,
        n: usize,
        distortion: impl Into<InstanceDistortion>,
        d: Rational,
    ) -> Result<Self> {
        let probs: Vec<f64> = window.iter().map(|&x| pmf.prob(x)).collect();
        Self::new(window, &probs, n, distortion, d)
    }

    fn from_exact(
        window: Vec<u64>,
        probs: Vec<BigRational>,
        n: usize,
        distortion: InstanceDistortion,
        d: Rational,
    ) -> Result<Self> {
        if window.is_empty() || window.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::ConfigInvalid("window must be nonempty and strictly increasing".into()));
        }
        if window.len() != probs.len() {
            return Err(Error::LengthMismatch(window.len(), probs.len()));
        }
        if n == 0 {
            return Err(Error::ConfigInvalid("block length must be at least 1".into()));
        }
        if d.is_negative() {
            return Err(Error::InvalidDistortion("d must be nonnegative".into()));
        }
        let total: BigRational = probs.iter().sum();
        let lo = f64_to_big(1.0 - WINDOW_MASS_TOLERANCE);
        let hi = f64_to_big(1.0 + WINDOW_MASS_TOLERANCE);
        if total < lo || total > hi {
            return Err(Error::WindowTooSmall(format!(
                "window mass {} outside 1 ± {WINDOW_MASS_TOLERANCE}",
                total.to_f64().unwrap_or(f64::NAN)
            )));
        }
        let probs = probs.into_iter().map(|p| p / &total).collect();
        Ok(FiniteInstance { window, probs, n, distortion, d })
    }

    pub fn window(&self) -> &[u64] {
        &self.window
    }

    /// Renormalized window probabilities.
    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn probs_f64(&self) -> Vec<f64> {
        self.probs.iter().map(crate::rational::big_to_f64).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn distortion(&self) -> InstanceDistortion {
        self.distortion
    }

    pub fn d(&self) -> Rational {
        self.d
    }

    pub fn with_d(&self, d: Rational) -> Self {
        FiniteInstance { d, ..self.clone() }
    }

    pub fn with_n(&self, n: usize) -> Self {
        FiniteInstance { n, ..self.clone() }
    }

    /// Same source and level under ρ^k.
    pub fn truncated(&self, k: u64) -> Self {
        FiniteInstance { distortion: InstanceDistortion::Truncated(self.distortion.spec(), k), ..self.clone() }
    }

    /// Law of S_k(X) on its image, under ρ^k (which is ρ̃ on Γ_{k+1}).
    pub fn image(&self, k: u64) -> Self {
        let mut window: Vec<u64> = Vec::new();
        let mut probs: Vec<BigRational> = Vec::new();
        for (&x, p) in self.window.iter().zip(&self.probs) {
            let y = x.min(k + 1);
            if window.last() == Some(&y) {
                *probs.last_mut().unwrap() += p;
            } else {
                window.push(y);
                probs.push(p.clone());
            }
        }
        FiniteInstance {
            window,
            probs,
            n: self.n,
            distortion: InstanceDistortion::Truncated(self.distortion.spec(), k),
            d: self.d,
        }
    }

    /// |window|^n, saturating.
    pub fn block_space_size(&self) -> u128 {
        (self.window.len() as u128).checked_pow(self.n as u32).unwrap_or(u128::MAX)
    }

    /// All window blocks in lexicographic order.
    pub fn blocks(&self) -> Vec<Vec<u64>> {
        let m = self.window.len();
        let total = self.block_space_size() as usize;
        (0..total)
            .map(|mut code| {
                let mut b = vec![0u64; self.n];
                for slot in b.iter_mut().rev() {
                    *slot = self.window[code % m];
                    code /= m;
                }
                b
            })
            .collect()
    }

    /// Integer weights proportional to the block probabilities, with their total.
    pub fn block_weights(&self) -> (Vec<BigUint>, BigUint) {
        let den = self.probs.iter().fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
        let letters: Vec<BigUint> = self
            .probs
            .iter()
            .map(|p| (p.numer() * (&den / p.denom())).to_biguint().unwrap())
            .collect();
        let letter_total: BigUint = letters.iter().sum();
        let m = letters.len();
        let total = self.block_space_size() as usize;
        let weights = (0..total)
            .map(|mut code| {
                let mut w = BigUint::one();
                for _ in 0..self.n {
                    w *= &letters[code % m];
                    code /= m;
                }
                w
            })
            .collect();
        (weights, letter_total.pow(self.n as u32))
    }

    /// Exact block probabilities, aligned with `blocks()`.
    pub fn block_probs(&self) -> Vec<BigRational> {
        let (w, t) = self.block_weights();
        let t = BigInt::from(t);
        w.into_iter().map(|w| BigRational::new(w.into(), t.clone())).collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.probs.iter().filter(|p| !p.is_zero()).count() <= 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn renormalizes_and_rejects_lossy_windows() {
        let spec = DistortionSpec::absolute();
        let inst = FiniteInstance::new(vec![1, 2], &[0.25, 0.25], 1, spec, rat(0, 1));
        assert!(matches!(inst, Err(Error::WindowTooSmall(_))));
        let inst = FiniteInstance::new(vec![1, 2], &[0.75, 0.25 - 1e-10], 1, spec, rat(0, 1)).unwrap();
        let total: BigRational = inst.probs().iter().sum();
        assert!(total.is_one());
        assert!(FiniteInstance::new(vec![2, 1], &[0.5, 0.5], 1, spec, rat(0, 1)).is_err());
    }

    #[test]
    fn blocks_and_weights() {
        let spec = DistortionSpec::absolute();
        let inst = FiniteInstance::new(vec![1, 3], &[0.75, 0.25], 2, spec, rat(0, 1)).unwrap();
        assert_eq!(inst.blocks(), vec![vec![1, 1], vec![1, 3], vec![3, 1], vec![3, 3]]);
        let probs = inst.block_probs();
        assert_eq!(probs[0], BigRational::new(9.into(), 16.into()));
        assert_eq!(probs[1], BigRational::new(3.into(), 16.into()));
        assert_eq!(probs[3], BigRational::new(1.into(), 16.into()));
    }

    #[test]
    fn image_merges_overflow_symbols() {
        let spec = DistortionSpec::absolute();
        let inst = FiniteInstance::new(vec![1, 2, 3], &[0.5, 0.25, 0.25], 1, spec, rat(1, 1)).unwrap();
        let img = inst.image(1);
        assert_eq!(img.window(), &[1, 2]);
        assert_eq!(img.probs()[1], BigRational::new(1.into(), 2.into()));
        assert_eq!(img.distortion(), InstanceDistortion::Truncated(spec, 1));
        assert_eq!(inst.truncated(1).distortion().rho(2, 3), rat(0, 1));
    }
}
