use super::envelope::{EnvelopeKind, EnvelopeSpec};
use super::pmf::{SourcePmf, Tail};
use crate::error::{Error, Result};
use crate::special::{hurwitz_zeta, log_power_sum, plogp};

/// π̃_k = {{x ≤ k}, {k+1}, {k+2}, …}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TailPartitionIndex {
    k: u64,
}

impl TailPartitionIndex {
    pub fn new(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::ConfigInvalid("tail partition needs k >= 1".into()));
        }
        Ok(TailPartitionIndex { k })
    }

    pub fn k(&self) -> u64 {
        self.k
    }
}

/// Finite list of disjoint symbol cells; every unlisted symbol belongs to one
/// remainder cell.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymbolPartition {
    cells: Vec<Vec<u64>>,
}

impl SymbolPartition {
    pub fn new(cells: Vec<Vec<u64>>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &cells {
            for &x in c {
                if !seen.insert(x) {
                    return Err(Error::ConfigInvalid(format!("symbol {x} in two cells")));
                }
            }
        }
        Ok(SymbolPartition { cells })
    }

    pub fn whole_space() -> Self {
        SymbolPartition { cells: vec![] }
    }

    pub fn singletons(lo: u64, hi: u64) -> Self {
        SymbolPartition { cells: (lo..=hi).map(|x| vec![x]).collect() }
    }

    pub fn cells(&self) -> &[Vec<u64>] {
        &self.cells
    }

    /// Cell masses, remainder last.
    pub fn masses(&self, pmf: &SourcePmf) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .cells
            .iter()
            .map(|c| c.iter().map(|&x| pmf.prob(x)).sum())
            .collect();
        let listed: f64 = out.iter().sum();
        out.push((1.0 - listed).max(0.0));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Partition {
    Tail(TailPartitionIndex),
    Symbols(SymbolPartition),
}

impl From<TailPartitionIndex> for Partition {
    fn from(t: TailPartitionIndex) -> Self {
        Partition::Tail(t)
    }
}

impl From<SymbolPartition> for Partition {
    fn from(s: SymbolPartition) -> Self {
        Partition::Symbols(s)
    }
}

pub fn entropy(pmf: &SourcePmf) -> Result<f64> {
    pmf.entropy_from(0)
}

/// H_{σ(π)}(μ) = −Σ_A μ(A) log μ(A).
pub fn projected_entropy(pmf: &SourcePmf, partition: &Partition) -> Result<f64> {
    match partition {
        Partition::Tail(t) => {
            let head = 1.0 - pmf.mass_suffix(t.k + 1);
            Ok(plogp(head) + pmf.entropy_from(t.k + 1)?)
        }
        Partition::Symbols(s) => Ok(s.masses(pmf).into_iter().map(plogp).sum()),
    }
}

fn kl_term(p: f64, q: f64, cell: usize) -> Result<f64> {
    if p <= 0.0 {
        return Ok(0.0);
    }
    if q <= 0.0 {
        return Err(Error::AbsoluteContinuityViolated(cell));
    }
    Ok(p * (p / q).log2())
}

/// D_{σ(π)}(p‖q) = Σ_A p(A) log p(A)/q(A).
pub fn projected_divergence(p: &SourcePmf, q: &SourcePmf, partition: &Partition) -> Result<f64> {
    match partition {
        Partition::Symbols(s) => {
            let pm = s.masses(p);
            let qm = s.masses(q);
            let mut d = 0.0;
            for (i, (a, b)) in pm.iter().zip(&qm).enumerate() {
                d += kl_term(*a, *b, i)?;
            }
            Ok(d.max(0.0))
        }
        Partition::Tail(t) => {
            let ph = 1.0 - p.mass_suffix(t.k + 1);
            let qh = 1.0 - q.mass_suffix(t.k + 1);
            let head = kl_term(ph, qh, 0)?;
            Ok((head + pointwise_divergence_from(p, q, t.k + 1)?).max(0.0))
        }
    }
}

/// Full divergence D(p‖q).
pub fn divergence(p: &SourcePmf, q: &SourcePmf) -> Result<f64> {
    Ok(pointwise_divergence_from(p, q, 0)?.max(0.0))
}

/// Σ_{x ≥ k} p(x) log p(x)/q(x).
fn pointwise_divergence_from(p: &SourcePmf, q: &SourcePmf, k: u64) -> Result<f64> {
    let start = k.max(p.floor());
    let p_end = p.explicit_end();
    let tail_start = p_end.max(q.explicit_end()).max(start);
    let mut d = 0.0;
    for x in start..tail_start {
        d += kl_term(p.prob(x), q.prob(x), (x - start) as usize + 1)?;
    }
    let Some(pt) = p.tail() else {
        return Ok(d);
    };
    let Some(qt) = q.tail() else {
        return Err(Error::AbsoluteContinuityViolated(0));
    };
    let ln2 = std::f64::consts::LN_2;
    let from = tail_start;
    let extra = match (pt, qt) {
        (
            Tail::Geometric { scale: a, base: b },
            Tail::Geometric { scale: c, base: e },
        ) => {
            let mass = pt.suffix(from);
            let moment = a * crate::special::geometric_first_moment(*b, from);
            mass * (a / c).log2() + moment * (b / e).log2()
        }
        (
            Tail::PowerLaw { scale: a, exponent: s },
            Tail::PowerLaw { scale: c, exponent: r },
        ) => {
            let mass = a * hurwitz_zeta(*s, from.max(1));
            let lsum = a * log_power_sum(*s, from.max(1));
            mass * (a / c).log2() + (r - s) * lsum / ln2
        }
        _ => {
            // Mixed analytic forms: sum until the remaining p-mass is negligible.
            let mut acc = 0.0;
            let mut x = from;
            let mut steps = 0u64;
            while pt.suffix(x) > 1e-17 {
                let px = pt.eval(x);
                if px > 0.0 {
                    acc += px * (pt.log2_eval(x) - qt.log2_eval(x));
                }
                x += 1;
                steps += 1;
                if steps > 10_000_000 {
                    return Err(Error::DivergentEntropy);
                }
            }
            acc
        }
    };
    Ok(d + extra)
}

/// I_k / (S_k log 1/S_k), with I_k = Σ_{i≥k} f log 1/f and S_k = Σ_{i≥k} f.
pub fn tail_ratio_series(env: &EnvelopeSpec, k: u64) -> Result<f64> {
    if !env.is_summable() {
        return Err(Error::EntropySeriesDiverges("envelope is not summable".into()));
    }
    let tau = env.tau()?;
    if k < tau.max(1) {
        return Err(Error::EntropySeriesDiverges(format!("k = {k} below τ_f = {tau}")));
    }
    let (s, i) = match env.kind() {
        EnvelopeKind::Polynomial { p } => {
            let s = hurwitz_zeta(*p, k);
            let i = p * log_power_sum(*p, k) / std::f64::consts::LN_2;
            (s, i)
        }
        EnvelopeKind::Exponential { scale, base } => {
            let t = Tail::Geometric { scale: *scale, base: *base };
            (t.suffix(k), t.suffix_entropy(k)?)
        }
        EnvelopeKind::Tabulated { values, tail } => {
            let len = values.len() as u64;
            let mut s = 0.0;
            let mut i = 0.0;
            for x in k..=len {
                let f = values[(x - 1) as usize];
                s += f;
                i += plogp(f);
            }
            if let Some(t) = tail {
                s += t.suffix(k.max(len + 1));
                i += t.suffix_entropy(k.max(len + 1))?;
            }
            (s, i)
        }
    };
    let denom = s * (1.0 / s).log2();
    if !(denom > 0.0) || !i.is_finite() {
        return Err(Error::EntropySeriesDiverges(format!("degenerate tail at k = {k}")));
    }
    Ok(i / denom)
}

/// Closed-form value attached to the tail ratio by the polynomial and exponential analyses:
/// p·ζ(p)/((p−1)(ζ(p)−1)) and 1/(K e^{−α} α log₂ e).
pub fn tail_ratio_reference(env: &EnvelopeSpec) -> Option<f64> {
    match env.kind() {
        EnvelopeKind::Polynomial { p } if *p > 1.0 => {
            let s1 = hurwitz_zeta(*p, 1);
            let s2 = hurwitz_zeta(*p, 2);
            Some(p * s1 / ((p - 1.0) * s2))
        }
        EnvelopeKind::Exponential { scale, base } if *base < 1.0 => {
            let alpha = -base.ln();
            Some(1.0 / (scale * base * alpha * std::f64::consts::LOG2_E))
        }
        _ => None,
    }
}

/// Limit of the tail ratio as k → ∞: p/(p−1) for polynomial envelopes, 1 for exponential ones.
pub fn tail_ratio_limit(env: &EnvelopeSpec) -> Option<f64> {
    match env.kind() {
        EnvelopeKind::Polynomial { p } if *p > 1.0 => Some(p / (p - 1.0)),
        EnvelopeKind::Exponential { base, .. } if *base < 1.0 => Some(1.0),
        _ => None,
    }
}
