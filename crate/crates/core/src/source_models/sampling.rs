use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::envelope::EnvelopeSpec;
use super::pmf::{SourcePmf, Tail};
use crate::error::{Error, Result};
use crate::special::search_first;

/// Inversion sampler over the explicit CDF plus the analytic tail.
#[derive(Debug, Clone)]
pub struct Sampler {
    floor: u64,
    cdf: Vec<f64>,
    tail: Option<Tail>,
    tail_start: u64,
    tail_total: f64,
}

impl Sampler {
    pub fn new(pmf: &SourcePmf) -> Self {
        let mut acc = 0.0;
        let cdf = pmf
            .probs()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let tail_start = pmf.explicit_end();
        let tail = pmf.tail().cloned();
        let tail_total = tail.as_ref().map_or(0.0, |t| t.suffix(tail_start));
        Sampler { floor: pmf.floor(), cdf, tail, tail_start, tail_total }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random::<f64>();
        let explicit = self.cdf.last().copied().unwrap_or(0.0);
        if u < explicit || self.tail.is_none() || self.tail_total <= 0.0 {
            let i = self.cdf.partition_point(|&c| c <= u);
            // Skip zero-mass slots and clamp rounding overshoot to the last positive symbol.
            let i = i.min(self.cdf.len() - 1);
            let prev = if i == 0 { 0.0 } else { self.cdf[i - 1] };
            if self.cdf[i] > prev {
                return self.floor + i as u64;
            }
            let j = (0..self.cdf.len())
                .rev()
                .find(|&j| self.cdf[j] > if j == 0 { 0.0 } else { self.cdf[j - 1] })
                .unwrap_or(0);
            return self.floor + j as u64;
        }
        let t = self.tail.as_ref().unwrap();
        // Remaining tail mass after the sampled symbol must fall below the residual.
        let resid = self.tail_total - (u - explicit);
        let x = search_first(self.tail_start, |x| t.suffix(x + 1) < resid);
        x.max(self.tail_start)
    }

    pub fn sample_block<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<u64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// i.i.d. block of length `n`, deterministic in `seed`.
pub fn sample_block(pmf: &SourcePmf, n: usize, seed: u64) -> Vec<u64> {
    let mut rng = rng_from_seed(seed);
    Sampler::new(pmf).sample_block(&mut rng, n)
}

/// Draws μ ∈ Λ_f supported on {0, …, window}: μ(x) = U_x·min(f(x), 1) for x ≥ 1, with the
/// deficit placed at the first symbol from τ_f − 1 on that can absorb it.
pub fn random_dominated_pmf<R: Rng + ?Sized>(
    env: &EnvelopeSpec,
    window: u64,
    rng: &mut R,
) -> Result<SourcePmf> {
    let tau = env.tau()?;
    if window < tau {
        return Err(Error::WindowTooSmall(format!("window {window} below τ_f = {tau}")));
    }
    let caps: Vec<f64> = (0..=window).map(|x| env.eval(x).min(1.0)).collect();
    for _ in 0..10_000 {
        let mut probs: Vec<f64> = caps.iter().map(|c| rng.random::<f64>() * c).collect();
        probs[0] = 0.0;
        let total: f64 = probs.iter().sum();
        if total > 1.0 {
            probs.iter_mut().for_each(|p| *p /= total);
            return SourcePmf::from_probs(0, probs);
        }
        let deficit = 1.0 - total;
        let start = (tau - 1) as usize;
        if let Some(s) = (start..probs.len()).find(|&s| probs[s] + deficit <= caps[s]) {
            probs[s] += deficit;
            return SourcePmf::from_probs(0, probs);
        }
    }
    Err(Error::WindowTooSmall("no dominated pmf found on the window".into()))
}

/// Certificate that μ(x) ≤ f(x) + 1e-12 for every symbol.
pub fn envelope_contains(env: &EnvelopeSpec, pmf: &SourcePmf) -> Result<bool> {
    Ok(first_violation(env, pmf)?.is_none())
}

const SLACK: f64 = 1e-12;

/// First symbol where μ exceeds f, if any.
pub fn first_violation(env: &EnvelopeSpec, pmf: &SourcePmf) -> Result<Option<u64>> {
    let end = pmf.explicit_end();
    for x in pmf.floor()..end {
        if pmf.prob(x) > env.eval(x) + SLACK {
            return Ok(Some(x));
        }
    }
    let Some(pt) = pmf.tail() else {
        return Ok(None);
    };
    let (env_start, ft) = match env.analytic_tail() {
        Some(v) => v,
        None => {
            // Envelope vanishes past its table: any positive tail mass violates it.
            let last = match env.kind() {
                super::envelope::EnvelopeKind::Tabulated { values, .. } => values.len() as u64,
                _ => 0,
            };
            let x = end.max(last + 1);
            return Ok((pt.eval(x) > SLACK).then_some(x));
        }
    };
    // Pointwise until both analytic forms apply.
    let joint = end.max(env_start);
    for x in end..joint {
        if pt.eval(x) > env.eval(x) + SLACK {
            return Ok(Some(x));
        }
    }
    let ok_at = |x: u64| pt.eval(x) <= ft.eval(x) * (1.0 + 1e-12) + SLACK;
    let check_from = |x0: u64| if ok_at(x0) { None } else { Some(x0) };
    match (pt, &ft) {
        (Tail::Geometric { base: b, .. }, Tail::Geometric { base: e, .. }) => {
            if b <= e {
                Ok(check_from(joint))
            } else {
                Ok(Some(eventual_violation(pt, &ft, joint)?))
            }
        }
        (Tail::PowerLaw { exponent: q, .. }, Tail::PowerLaw { exponent: p, .. }) => {
            if q >= p {
                Ok(check_from(joint))
            } else {
                Ok(Some(eventual_violation(pt, &ft, joint)?))
            }
        }
        (Tail::Geometric { base: b, .. }, Tail::PowerLaw { exponent: p, .. }) => {
            // b^x x^p decreases for x > p / ln(1/b).
            let turn = (p / (1.0 / b).ln()).ceil().max(0.0) as u64 + 1;
            if turn.saturating_sub(joint) > 10_000_000 {
                return Err(Error::IncomparableTails("monotone region out of reach".into()));
            }
            for x in joint..=turn.max(joint) {
                if !ok_at(x) {
                    return Ok(Some(x));
                }
            }
            Ok(None)
        }
        (Tail::PowerLaw { .. }, Tail::Geometric { base: e, .. }) => {
            if *e >= 1.0 {
                Ok(check_from(joint))
            } else {
                Ok(Some(eventual_violation(pt, &ft, joint)?))
            }
        }
    }
}

fn eventual_violation(pt: &Tail, ft: &Tail, from: u64) -> Result<u64> {
    let x = search_first(from, |x| pt.log2_eval(x) > ft.log2_eval(x) + 1e-9);
    if x == u64::MAX {
        return Err(Error::IncomparableTails("no violation located".into()));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn containment_examples() {
        let f = EnvelopeSpec::exponential(2.0, std::f64::consts::LN_2).unwrap();
        let g = SourcePmf::geometric(0.5).unwrap();
        assert!(envelope_contains(&f, &g).unwrap());
        let p2 = EnvelopeSpec::polynomial(2.0).unwrap();
        assert!(envelope_contains(&p2, &SourcePmf::point_mass(1)).unwrap());
        let bad = SourcePmf::from_probs(1, vec![0.5, 0.5]).unwrap();
        assert!(!envelope_contains(&p2, &bad).unwrap());
    }

    #[test]
    fn containment_of_envelope_distributions() {
        for env in [
            EnvelopeSpec::geometric(0.5).unwrap(),
            EnvelopeSpec::polynomial(2.0).unwrap(),
            EnvelopeSpec::exponential(2.0, 1.0).unwrap(),
        ] {
            let mu = env.envelope_distribution().unwrap();
            assert!(envelope_contains(&env, &mu).unwrap(), "{env:?}");
        }
    }

    #[test]
    fn heavier_tail_is_rejected() {
        let env = EnvelopeSpec::geometric(0.5).unwrap();
        let z = crate::special::hurwitz_zeta(3.0, 1);
        let pmf = SourcePmf::new(1, vec![], Some(Tail::PowerLaw { scale: 1.0 / z, exponent: 3.0 }))
            .unwrap();
        assert!(first_violation(&env, &pmf).unwrap().is_some());
        let env = EnvelopeSpec::polynomial(2.0).unwrap();
        assert_eq!(first_violation(&env, &SourcePmf::geometric(0.5).unwrap()).unwrap(), Some(3));
        assert!(envelope_contains(&env, &SourcePmf::geometric(0.25).unwrap()).unwrap());
    }

    #[test]
    fn point_mass_block() {
        assert_eq!(sample_block(&SourcePmf::point_mass(3), 4, 9), vec![3, 3, 3, 3]);
    }

    #[test]
    fn deterministic_in_seed() {
        let g = SourcePmf::geometric(0.5).unwrap();
        assert_eq!(sample_block(&g, 50, 11), sample_block(&g, 50, 11));
        assert_ne!(sample_block(&g, 50, 11), sample_block(&g, 50, 12));
    }

    #[test]
    fn geometric_mean_within_three_sigma() {
        let g = SourcePmf::geometric(0.5).unwrap();
        let n = 100_000;
        let xs = sample_block(&g, n, 2024);
        let mean = xs.iter().sum::<u64>() as f64 / n as f64;
        // Var = r/(1−r)² = 2.
        let sigma = (2.0 / n as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn power_law_tail_sampling_frequencies() {
        let env = EnvelopeSpec::polynomial(2.0).unwrap();
        let mu = env.envelope_distribution().unwrap();
        let xs = sample_block(&mu, 200_000, 5);
        for x in [1u64, 2, 3, 10] {
            let freq = xs.iter().filter(|&&v| v == x).count() as f64 / xs.len() as f64;
            let p = mu.prob(x);
            let sd = (p * (1.0 - p) / xs.len() as f64).sqrt();
            assert!((freq - p).abs() < 4.0 * sd, "{x}: {freq} vs {p}");
        }
    }

    #[test]
    fn dominated_pmfs_are_members() {
        let mut rng = rng_from_seed(1);
        for env in [
            EnvelopeSpec::geometric(0.5).unwrap(),
            EnvelopeSpec::polynomial(2.0).unwrap(),
            EnvelopeSpec::exponential(2.0, 1.0).unwrap(),
        ] {
            for _ in 0..50 {
                let mu = random_dominated_pmf(&env, 30, &mut rng).unwrap();
                assert!(envelope_contains(&env, &mu).unwrap());
                assert!((mu.total_mass() - 1.0).abs() < 1e-12);
            }
        }
    }
}
