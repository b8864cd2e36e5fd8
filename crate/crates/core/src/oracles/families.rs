use crate::distortion::{DistortionKind, DistortionSpec};
use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};
use crate::source_models::{EnvelopeSpec, SourcePmf};

/// Largest symbol a segment may reach.
pub const SEGMENT_SYMBOL_LIMIT: u64 = 1 << 22;

/// m pmfs in Λ_f with pairwise disjoint supports. Each segment starts `gap` symbols
/// after the previous one ends and collects f(x) until the mass reaches one; its
/// last symbol takes the remainder.
pub fn disjoint_family_builder(env: &EnvelopeSpec, m: usize, start: u64, gap: u64) -> Result<Vec<SourcePmf>> {
    let mut out = Vec::with_capacity(m);
    let mut s = start;
    for _ in 0..m {
        let mut probs = Vec::new();
        let mut acc = 0.0;
        let mut x = s;
        loop {
            if x > SEGMENT_SYMBOL_LIMIT {
                return Err(Error::WindowTooSmall(format!(
                    "segment {} starting at {s} does not reach unit mass below {SEGMENT_SYMBOL_LIMIT}",
                    out.len() + 1
                )));
            }
            let f = env.eval(x);
            if acc + f >= 1.0 {
                probs.push(1.0 - acc);
                break;
            }
            probs.push(f);
            acc += f;
            x += 1;
        }
        out.push(SourcePmf::from_probs(s, probs)?);
        s = x + 1 + gap;
    }
    Ok(out)
}

/// Smallest gap between segments such that no cell of a Q_n(d) partition meets two
/// of them (letters of distinct segments are more than 2d apart).
pub fn separation_gap(spec: &DistortionSpec, d: Rational) -> Result<u64> {
    let two_d = d * Rational::from(2);
    match spec.kind() {
        DistortionKind::Absolute => Ok(two_d.floor().to_integer().max(0) as u64),
        DistortionKind::Bounded { scale, cap } => {
            if scale * Rational::from(cap as i128) <= two_d {
                return Err(Error::InvalidDistortion(format!(
                    "ρ_max = {} does not exceed 2d = {}",
                    format_rational(&(scale * Rational::from(cap as i128))),
                    format_rational(&two_d)
                )));
            }
            Ok((two_d / scale).floor().to_integer().max(0) as u64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::capacity::{projected_info_radius, CapacityProblem};
    use crate::rational::rat;
    use crate::source_models::{envelope_contains, SymbolPartition};

    fn radius(family: &[SourcePmf], hi: u64) -> f64 {
        let cap = CapacityProblem::from_partition(family, &SymbolPartition::singletons(0, hi).into()).unwrap();
        projected_info_radius(&cap).unwrap().capacity
    }

    #[test]
    fn constant_envelope_gives_point_masses() {
        let one = EnvelopeSpec::polynomial(0.0).unwrap();
        let fam = disjoint_family_builder(&one, 2, 1, 0).unwrap();
        assert_eq!(fam[0], SourcePmf::point_mass(1));
        assert_eq!(fam[1], SourcePmf::point_mass(2));
        assert!((radius(&fam, 4) - 1.0).abs() < 1e-9);
        let fam = disjoint_family_builder(&one, 8, 1, 0).unwrap();
        assert!((radius(&fam, 10) - 3.0).abs() < 1e-6);
    }

    #[test]
    fn square_root_envelope() {
        let env = EnvelopeSpec::polynomial(0.5).unwrap();
        let fam = disjoint_family_builder(&env, 4, 1, 0).unwrap();
        let mut hi = 0;
        for (i, p) in fam.iter().enumerate() {
            assert!(envelope_contains(&env, p).unwrap());
            assert!((p.total_mass() - 1.0).abs() < 1e-12);
            if i > 0 {
                assert!(p.floor() > fam[i - 1].support_max().unwrap());
            }
            hi = p.support_max().unwrap();
        }
        assert!((radius(&fam, hi) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn summable_envelope_runs_out() {
        let env = EnvelopeSpec::geometric(0.5).unwrap();
        assert!(matches!(disjoint_family_builder(&env, 2, 1, 0), Err(Error::WindowTooSmall(_))));
    }

    #[test]
    fn gaps() {
        assert_eq!(separation_gap(&DistortionSpec::absolute(), rat(1, 1)).unwrap(), 2);
        assert_eq!(separation_gap(&DistortionSpec::absolute(), rat(3, 4)).unwrap(), 1);
        let b = DistortionSpec::bounded(rat(1, 1), 3).unwrap();
        assert_eq!(separation_gap(&b, rat(1, 1)).unwrap(), 2);
        assert!(separation_gap(&b, rat(3, 2)).is_err());
    }
}
