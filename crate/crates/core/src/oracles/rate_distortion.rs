use std::f64::consts::LN_2;

use super::instance::FiniteInstance;
use crate::error::{Error, Result};
use crate::rational::to_f64;
use crate::special::plogp;

pub const BA_TOLERANCE: f64 = 1e-9;
pub const BA_MAX_ITERATIONS: usize = 100_000;

/// Single-letter rate-distortion problem on a finite source window.
#[derive(Debug, Clone, PartialEq)]
pub struct RdProblem {
    p: Vec<f64>,
    /// dist[x][y] over source letters × reconstruction letters.
    dist: Vec<Vec<f64>>,
    /// Entropy of the source after merging letters at distortion zero.
    lossless: f64,
}

/// One converged alternating-minimization run at a fixed slope.
#[derive(Debug, Clone, PartialEq)]
pub struct RdPoint {
    pub slope: f64,
    /// Bits.
    pub rate: f64,
    pub distortion: f64,
    pub iterations: usize,
    /// −Σ_x p(x) ln Σ_y q(y) e^{−s ρ(x,y)} after each q update.
    pub objective: Vec<f64>,
}

/// Expected-distortion R(d) at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct RdSolution {
    /// Bits per sample, from the supporting line at the final slope.
    pub rate: f64,
    pub point: Option<RdPoint>,
}

impl RdProblem {
    pub fn new(p: Vec<f64>, dist: Vec<Vec<f64>>) -> Result<Self> {
        if p.is_empty() || dist.len() != p.len() || dist.iter().any(|r| r.len() != dist[0].len() || r.is_empty()) {
            return Err(Error::ConfigInvalid("distortion matrix does not match the pmf".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 || p.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidPmf(format!("window pmf sums to {total}")));
        }
        let m = p.len();
        let mut class: Vec<usize> = (0..m).collect();
        for x in 0..m {
            for x2 in 0..x {
                let same = (0..dist[0].len()).any(|y| dist[x][y] == 0.0 && dist[x2][y] == 0.0);
                if same {
                    class[x] = class[x2];
                    break;
                }
            }
        }
        let mut mass = vec![0.0; m];
        for x in 0..m {
            mass[class[x]] += p[x];
        }
        let lossless = mass.into_iter().map(plogp).sum();
        Ok(RdProblem { p, dist, lossless })
    }

    /// Source letters of the window; reconstruction letters span the window's integer hull.
    pub fn from_instance(inst: &FiniteInstance) -> Result<Self> {
        let w = inst.window();
        let hull: Vec<u64> = (w[0]..=*w.last().unwrap()).collect();
        let dist = w
            .iter()
            .map(|&x| hull.iter().map(|&y| to_f64(&inst.distortion().rho(x, y))).collect())
            .collect();
        Self::new(inst.probs_f64(), dist)
    }

    /// Smallest expected distortion of a constant reconstruction.
    pub fn d_max(&self) -> f64 {
        (0..self.dist[0].len())
            .map(|y| self.p.iter().zip(&self.dist).map(|(p, r)| p * r[y]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn at_slope(&self, s: f64) -> Result<RdPoint> {
        let ny = self.dist[0].len();
        let kernel: Vec<Vec<f64>> = self.dist.iter().map(|r| r.iter().map(|&v| (-s * v).exp()).collect()).collect();
        let mut q = vec![1.0 / ny as f64; ny];
        let mut objective = Vec::new();
        for it in 1..=BA_MAX_ITERATIONS {
            let mut next = vec![0.0; ny];
            let mut f = 0.0;
            for (x, px) in self.p.iter().enumerate() {
                if *px == 0.0 {
                    continue;
                }
                let z: f64 = q.iter().zip(&kernel[x]).map(|(a, b)| a * b).sum();
                f -= px * z.ln();
                for y in 0..ny {
                    next[y] += px * q[y] * kernel[x][y] / z;
                }
            }
            objective.push(f);
            let delta = q.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            q = next;
            if delta < BA_TOLERANCE {
                let (rate, distortion) = self.evaluate(&q, &kernel);
                return Ok(RdPoint { slope: s, rate, distortion, iterations: it, objective });
            }
        }
        Err(Error::NonConvergence(BA_MAX_ITERATIONS))
    }

    fn evaluate(&self, q: &[f64], kernel: &[Vec<f64>]) -> (f64, f64) {
        let mut rate = 0.0;
        let mut dist = 0.0;
        for (x, px) in self.p.iter().enumerate() {
            if *px == 0.0 {
                continue;
            }
            let z: f64 = q.iter().zip(&kernel[x]).map(|(a, b)| a * b).sum();
            for (y, qy) in q.iter().enumerate() {
                let c = qy * kernel[x][y] / z;
                if c > 0.0 {
                    rate += px * c * (kernel[x][y] / z).ln();
                    dist += px * c * self.dist[x][y];
                }
            }
        }
        (rate.max(0.0) / LN_2, dist)
    }

    /// R(d) under the expected-distortion constraint, in bits.
    pub fn rate(&self, d: f64) -> Result<RdSolution> {
        if d <= 0.0 {
            return Ok(RdSolution { rate: self.lossless, point: None });
        }
        if d >= self.d_max() {
            return Ok(RdSolution { rate: 0.0, point: None });
        }
        let mut hi = 1.0;
        let mut top = self.at_slope(hi)?;
        while top.distortion > d {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::NonConvergence(BA_MAX_ITERATIONS));
            }
            top = self.at_slope(hi)?;
        }
        let mut lo = 0.0;
        let mut best = top;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let pt = self.at_slope(mid)?;
            if pt.distortion > d {
                lo = mid;
            } else {
                hi = mid;
                best = pt;
            }
            if (best.distortion - d).abs() < 1e-10 || hi - lo < 1e-12 {
                break;
            }
        }
        let rate = (best.rate + best.slope * (best.distortion - d) / LN_2).max(0.0);
        Ok(RdSolution { rate, point: Some(best) })
    }
}

/// Relaxed single-letter rate-distortion lower bound for the instance's source and level.
pub fn blahut_arimoto_rd(inst: &FiniteInstance) -> Result<RdSolution> {
    RdProblem::from_instance(inst)?.rate(to_f64(&inst.d()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::DistortionSpec;
    use crate::rational::rat;

    fn binary_entropy(p: f64) -> f64 {
        plogp(p) + plogp(1.0 - p)
    }

    #[test]
    fn binary_hamming_closed_form() {
        let spec = DistortionSpec::bounded(rat(1, 1), 1).unwrap();
        let inst = FiniteInstance::new(vec![1, 2], &[0.5, 0.5], 1, spec, rat(11, 100)).unwrap();
        let r = blahut_arimoto_rd(&inst).unwrap();
        assert!((r.rate - (1.0 - binary_entropy(0.11))).abs() < 1e-6, "{}", r.rate);
        // Bernoulli(0.2): R(d) = h(0.2) − h(d) for d < 0.2.
        let inst = FiniteInstance::new(vec![1, 2], &[0.8, 0.2], 1, spec, rat(1, 10)).unwrap();
        let r = blahut_arimoto_rd(&inst).unwrap();
        assert!((r.rate - (binary_entropy(0.2) - binary_entropy(0.1))).abs() < 1e-6);
    }

    #[test]
    fn endpoints() {
        let spec = DistortionSpec::absolute();
        let inst = FiniteInstance::new(vec![1, 2], &[0.5, 0.5], 1, spec, rat(0, 1)).unwrap();
        assert_eq!(blahut_arimoto_rd(&inst).unwrap().rate, 1.0);
        let inst = FiniteInstance::new(vec![1, 2, 3], &[0.2, 0.5, 0.3], 1, spec, rat(1, 2)).unwrap();
        assert_eq!(blahut_arimoto_rd(&inst).unwrap().rate, 0.0);
    }

    #[test]
    fn monotone_in_level_and_objective() {
        let spec = DistortionSpec::absolute();
        let inst = FiniteInstance::new(vec![0, 1, 2, 3], &[0.4, 0.3, 0.2, 0.1], 1, spec, rat(0, 1)).unwrap();
        let mut last = f64::INFINITY;
        for num in 1..12 {
            let r = blahut_arimoto_rd(&inst.with_d(rat(num, 10))).unwrap();
            assert!(r.rate >= 0.0 && r.rate <= last + 1e-9);
            last = r.rate;
            if let Some(pt) = r.point {
                assert!(pt.objective.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            }
        }
    }

    #[test]
    fn single_slope_run_converges() {
        let p = RdProblem::new(vec![0.5, 0.5], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(p.at_slope(2.0).is_ok());
    }
}
