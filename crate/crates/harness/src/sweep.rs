use rayon::prelude::*;

use dsfc::oracles::{blahut_arimoto_rd, brute_force_rn, BoundType, FiniteInstance, ReportRow, BRUTE_FORCE_BUDGET};
use dsfc::source_models::{random_dominated_pmf, rng_from_seed, SourcePmf};
use dsfc::two_stage_codec::{measured_rate_with, trial_seed, RateEstimate, TwoStageCodec};

use crate::bound::RedundancyBound;
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// Window probability mass left out of the relaxed reference.
const REFERENCE_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub label: String,
    pub pmf: SourcePmf,
}

/// {μ̃_f} ∪ explicit members ∪ sampled dominated pmfs, in that order.
pub fn subfamily(cfg: &ExperimentConfig) -> Result<Vec<Member>> {
    let mut out = Vec::new();
    if cfg.include_envelope {
        out.push(Member { label: "envelope".into(), pmf: cfg.envelope.envelope_distribution()? });
    }
    for (i, p) in cfg.extra.iter().enumerate() {
        out.push(Member { label: format!("extra{i}"), pmf: p.clone() });
    }
    let mut rng = rng_from_seed(cfg.seed);
    for i in 0..cfg.subfamily {
        let pmf = random_dominated_pmf(&cfg.envelope, cfg.window, &mut rng)?;
        out.push(Member { label: format!("sample{i}"), pmf });
    }
    Ok(out)
}

/// Symbols carrying mass, up to the point where the remaining tail is negligible.
fn support_window(pmf: &SourcePmf) -> Vec<u64> {
    let hi = pmf.support_max().unwrap_or_else(|| pmf.horizon(REFERENCE_TAIL));
    (pmf.floor()..=hi).filter(|&x| pmf.prob(x) > 0.0).collect()
}

/// Exact R_n when the block space fits the enumeration budget, otherwise the
/// relaxed single-letter rate-distortion lower bound.
pub fn reference_rate(cfg: &ExperimentConfig, pmf: &SourcePmf, n: u64) -> Result<(f64, BoundType)> {
    match exact_reference(cfg, pmf, n)? {
        Some(r) => Ok((r, BoundType::Exact)),
        None => Ok((relaxed_reference(cfg, pmf)?, BoundType::Lower)),
    }
}

fn exact_reference(cfg: &ExperimentConfig, pmf: &SourcePmf, n: u64) -> Result<Option<f64>> {
    let window = support_window(pmf);
    let fits = (window.len() as u128).checked_pow(n as u32).is_some_and(|s| s <= BRUTE_FORCE_BUDGET);
    if !fits {
        return Ok(None);
    }
    let inst = FiniteInstance::from_pmf(pmf, window, n as usize, cfg.distortion, cfg.d)?;
    Ok(Some(brute_force_rn(&inst)?.rate))
}

fn relaxed_reference(cfg: &ExperimentConfig, pmf: &SourcePmf) -> Result<f64> {
    let inst = FiniteInstance::from_pmf(pmf, support_window(pmf), 1, cfg.distortion, cfg.d)?;
    Ok(blahut_arimoto_rd(&inst)?.rate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemberOutcome {
    pub label: String,
    pub rate: RateEstimate,
    pub reference: f64,
    pub reference_bound: BoundType,
    pub redundancy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub n: u64,
    pub k: u64,
    pub uf: u64,
    pub members: Vec<MemberOutcome>,
    /// Index of the member with the largest redundancy.
    pub argmax: usize,
}

impl SweepPoint {
    pub fn redundancy(&self) -> f64 {
        self.members[self.argmax].redundancy
    }

    /// redundancy · n / (u_f(n) · log₂ n), when the denominator is positive.
    pub fn statistic(&self) -> Option<f64> {
        let den = self.uf as f64 * (self.n as f64).log2();
        (den > 0.0).then(|| self.redundancy() * self.n as f64 / den)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<(u64, std::result::Result<SweepPoint, String>)>,
    pub bound: RedundancyBound,
    pub bound_fitted: bool,
}

fn run_point(cfg: &ExperimentConfig, members: &[Member], refs: &[f64], n: u64) -> Result<SweepPoint> {
    let codec = TwoStageCodec::new(cfg.codec_config(n))?;
    let uf = cfg.envelope.u_f(n)?;
    let outcomes = members
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let seed = trial_seed(trial_seed(cfg.seed, n), i as u64);
            let rate = measured_rate_with(&codec, &m.pmf, cfg.trials, seed)?;
            let (reference, reference_bound) = match exact_reference(cfg, &m.pmf, n)? {
                Some(r) => (r, BoundType::Exact),
                None => (refs[i], BoundType::Lower),
            };
            Ok(MemberOutcome {
                label: m.label.clone(),
                redundancy: rate.total - reference,
                rate,
                reference,
                reference_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let argmax = (0..outcomes.len())
        .max_by(|&a, &b| outcomes[a].redundancy.total_cmp(&outcomes[b].redundancy).then(b.cmp(&a)))
        .unwrap();
    Ok(SweepPoint { n, k: codec.k(), uf, members: outcomes, argmax })
}

/// Measured rates over the subfamily at every n; rows come out in n order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let members = subfamily(cfg)?;
    for m in &members {
        if let Some(x) = dsfc::source_models::first_violation(&cfg.envelope, &m.pmf)? {
            return Err(HarnessError::Config(format!("subfamily member {} violates the envelope at {x}", m.label)));
        }
    }
    let refs = members.par_iter().map(|m| relaxed_reference(cfg, &m.pmf)).collect::<Result<Vec<_>>>()?;
    let points: Vec<(u64, std::result::Result<SweepPoint, String>)> = cfg
        .n_grid
        .par_iter()
        .map(|&n| match run_point(cfg, &members, &refs, n) {
            Ok(p) => Ok((n, Ok(p))),
            Err(HarnessError::Budget(msg)) => Ok((n, Err(msg))),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let (bound, bound_fitted) = match cfg.bound {
        Some(b) => (b, false),
        None => {
            let pts: Vec<(u64, u64, f64)> =
                points.iter().filter_map(|(_, p)| p.as_ref().ok()).map(|p| (p.n, p.uf, p.redundancy())).collect();
            (if pts.is_empty() { RedundancyBound::new(0.0, 0.0, 0.0)? } else { RedundancyBound::fit(&pts)? }, true)
        }
    };
    Ok(SweepResult { points, bound, bound_fitted })
}

impl SweepResult {
    pub fn has_budget_rows(&self) -> bool {
        self.points.iter().any(|(_, p)| p.is_err())
    }

    /// Normalized statistic per n, for points that were computed.
    pub fn statistics(&self) -> Vec<(u64, f64)> {
        self.points
            .iter()
            .filter_map(|(n, p)| p.as_ref().ok().and_then(|p| p.statistic()).map(|s| (*n, s)))
            .collect()
    }

    /// max/min of the statistic over the upper half of the grid.
    pub fn upper_half_ratio(&self) -> Option<f64> {
        let s = self.statistics();
        let upper = &s[s.len() / 2..];
        let max = upper.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let min = upper.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        (!upper.is_empty() && min > 0.0).then(|| max / min)
    }

    pub fn rows(&self) -> Vec<ReportRow> {
        use BoundType::*;
        let mut rows = Vec::new();
        for (n, p) in &self.points {
            let inst = format!("n={n}");
            let p = match p {
                Ok(p) => p,
                Err(_) => {
                    for q in ["rate", "reference_rate", "redundancy", "normalized_statistic"] {
                        rows.push(ReportRow::budget_exceeded(&inst, q));
                    }
                    continue;
                }
            };
            let top = &p.members[p.argmax];
            rows.push(ReportRow::new(&inst, "k", p.k as f64, Exact));
            rows.push(ReportRow::new(&inst, "u_f", p.uf as f64, Exact));
            rows.push(ReportRow::new(&inst, "rate", top.rate.total, Estimate));
            rows.push(ReportRow::new(&inst, "rate_stderr", top.rate.stderr, Estimate));
            rows.push(ReportRow::new(&inst, "first_stage_rate", top.rate.first, Estimate));
            rows.push(ReportRow::new(&inst, "second_stage_rate", top.rate.second, Estimate));
            rows.push(ReportRow::new(&inst, "reference_rate", top.reference, top.reference_bound));
            rows.push(ReportRow::new(&inst, "redundancy", p.redundancy(), SubfamilyMax));
            if let Some(s) = p.statistic() {
                rows.push(ReportRow::new(&inst, "normalized_statistic", s, SubfamilyMax));
            }
            rows.push(ReportRow::new(&inst, "bound_curve", self.bound.eval(p.n, p.uf), Estimate));
            for m in &p.members {
                let mi = format!("{inst}/{}", m.label);
                rows.push(ReportRow::new(&mi, "rate", m.rate.total, Estimate));
                rows.push(ReportRow::new(&mi, "reference_rate", m.reference, m.reference_bound));
                rows.push(ReportRow::new(&mi, "redundancy", m.redundancy, Estimate));
            }
        }
        let tag = if self.bound_fitted { Estimate } else { Upper };
        rows.push(ReportRow::new("bound", "c0", self.bound.c0, tag));
        rows.push(ReportRow::new("bound", "c1", self.bound.c1, tag));
        rows.push(ReportRow::new("bound", "c2", self.bound.c2, tag));
        rows
    }
}
