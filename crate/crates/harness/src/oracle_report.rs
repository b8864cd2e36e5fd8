use rand::Rng;

use dsfc::distortion::DistortionSpec;
use dsfc::kv::KvConfig;
use dsfc::oracles::{
    blahut_arimoto_rd, brute_force_rn, disjoint_family_builder, grid_block_partition, projected_info_radius,
    separation_gap, theorem2_conditions, truncation_check, BoundType, CapacityProblem, FiniteInstance, ReportRow,
};
use dsfc::rational::{format_rational, parse_rational, Rational};
use dsfc::source_models::{random_dominated_pmf, rng_from_seed, tail_ratio_reference, tail_ratio_series, EnvelopeSpec};

use crate::config::{distortion_from, envelope_from, parse_n_grid, parsed};
use crate::error::{HarnessError, Result};

/// Solver slack for brute force ≥ relaxed rate-distortion.
pub const SANDWICH_TOLERANCE: f64 = 1e-6;

/// One instance of the truncation identity batch.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationCase {
    pub instance: FiniteInstance,
    pub k: u64,
}

/// Random instances with at most three window symbols and n ≤ 2, at level 0.
pub fn truncation_batch(seed: u64, count: usize) -> Vec<TruncationCase> {
    let mut rng = rng_from_seed(seed);
    let specs = [DistortionSpec::absolute(), DistortionSpec::bounded(Rational::from(1), 2).unwrap()];
    (0..count)
        .map(|i| {
            let size = rng.random_range(2..=3usize);
            let mut window: Vec<u64> = Vec::new();
            while window.len() < size {
                let x = rng.random_range(1..=5u64);
                if !window.contains(&x) {
                    window.push(x);
                }
            }
            window.sort_unstable();
            let weights: Vec<f64> = (0..size).map(|_| rng.random_range(1..=8u32) as f64).collect();
            let total: f64 = weights.iter().sum();
            let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let n = rng.random_range(1..=2usize);
            let k = rng.random_range(1..window[size - 1]);
            let instance = FiniteInstance::new(window, &probs, n, specs[i % 2], Rational::from(0)).unwrap();
            TruncationCase { instance, k }
        })
        .collect()
}

/// Identity and sandwich rows for every case at every level.
pub fn truncation_rows(cases: &[TruncationCase], levels: &[Rational]) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for (i, c) in cases.iter().enumerate() {
        for d in levels {
            let inst = c.instance.with_d(*d);
            let id = format!(
                "t{i}:window={:?},n={},k={},d={}",
                inst.window(),
                inst.n(),
                c.k,
                format_rational(d)
            );
            let chk = truncation_check(&inst, c.k)?;
            let rd = blahut_arimoto_rd(&inst)?.rate;
            let flag = |b: bool| if b { 1.0 } else { 0.0 };
            rows.push(ReportRow::new(&id, "plain_rate", chk.plain, BoundType::Exact));
            rows.push(ReportRow::new(&id, "truncated_rate", chk.truncated, BoundType::Exact));
            rows.push(ReportRow::new(&id, "image_rate", chk.image, BoundType::Exact));
            rows.push(ReportRow::new(&id, "truncation_dominated", flag(chk.dominated), BoundType::Exact));
            rows.push(ReportRow::new(&id, "image_exact_equal", flag(chk.image_equal), BoundType::Exact));
            rows.push(ReportRow::new(&id, "relaxed_rd", rd, BoundType::Lower));
            rows.push(ReportRow::new(
                &id,
                "sandwich",
                flag(chk.plain >= rd - SANDWICH_TOLERANCE),
                BoundType::Exact,
            ));
        }
    }
    Ok(rows)
}

/// Radius of disjoint-support families of each size under a Q_n(d) grid partition.
pub fn disjoint_rows(env: &EnvelopeSpec, spec: &DistortionSpec, d: Rational, n: usize, sizes: &[u64]) -> Result<Vec<ReportRow>> {
    let gap = separation_gap(spec, d)?;
    let mut rows = Vec::new();
    for &m in sizes {
        let family = disjoint_family_builder(env, m as usize, 1, gap)?;
        let mut letters: Vec<u64> = family
            .iter()
            .flat_map(|p| (p.floor()..=p.support_max().unwrap()).filter(|&x| p.prob(x) > 0.0))
            .collect();
        letters.sort_unstable();
        let partition = grid_block_partition(&letters, n, spec, d)?;
        let cap = CapacityProblem::from_block_partition(&family, &partition)?;
        let sol = projected_info_radius(&cap)?;
        let id = format!("m={m}");
        rows.push(ReportRow::new(&id, "radius", sol.capacity, BoundType::Lower));
        rows.push(ReportRow::new(&id, "uniform_prior_information", sol.uniform_information, BoundType::Lower));
        rows.push(ReportRow::new(&id, "log2_m", (m as f64).log2(), BoundType::Exact));
    }
    Ok(rows)
}

pub fn tail_ratio_rows(env: &EnvelopeSpec, ks: &[u64]) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for &k in ks {
        let id = format!("k={k}");
        match tail_ratio_series(env, k) {
            Ok(v) => rows.push(ReportRow::new(&id, "tail_ratio", v, BoundType::Estimate)),
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(r) = tail_ratio_reference(env) {
        rows.push(ReportRow::new("analytic", "tail_ratio_reference", r, BoundType::Upper));
    }
    Ok(rows)
}

fn levels(cfg: &KvConfig, default: &str) -> Result<Vec<Rational>> {
    cfg.get("d_grid")
        .unwrap_or(default)
        .split(',')
        .map(|t| parse_rational(t).map_err(|e| HarnessError::Config(e.to_string())))
        .collect()
}

fn level(cfg: &KvConfig, default: &str) -> Result<Rational> {
    parse_rational(cfg.get("d").unwrap_or(default)).map_err(|e| HarnessError::Config(e.to_string()))
}

fn symbols(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| HarnessError::Config(format!("bad symbol `{t}`"))))
        .collect()
}

/// Runs the oracle task named by `task`.
pub fn run_oracle(cfg: &KvConfig) -> Result<Vec<ReportRow>> {
    let seed: u64 = parsed(cfg, "seed")?.unwrap_or(1);
    let spec = distortion_from(cfg)?.unwrap_or_else(DistortionSpec::absolute);
    match cfg.get("task").unwrap_or("truncation") {
        "truncation" => {
            let count = parsed(cfg, "count")?.unwrap_or(24);
            truncation_rows(&truncation_batch(seed, count), &levels(cfg, "0,1/2,1,3/2")?)
        }
        "disjoint" => {
            let env = envelope_from(cfg)?.unwrap_or_else(|| EnvelopeSpec::polynomial(0.0).unwrap());
            let sizes = parse_n_grid(cfg.get("m").unwrap_or("2,4,8"))?;
            disjoint_rows(&env, &spec, level(cfg, "1")?, parsed(cfg, "n")?.unwrap_or(1), &sizes)
        }
        "tail-ratio" => {
            let env = envelope_from(cfg)?.unwrap_or_else(|| EnvelopeSpec::polynomial(2.0).unwrap());
            tail_ratio_rows(&env, &parse_n_grid(cfg.get("k_grid").unwrap_or("10,100,1000,10000"))?)
        }
        "rn" => {
            let window = symbols(cfg.get("window").unwrap_or("1,2"))?;
            let probs: Vec<f64> = match cfg.get("probs") {
                Some(p) => p
                    .split(',')
                    .map(|t| t.trim().parse().map_err(|_| HarnessError::Config(format!("bad probability `{t}`"))))
                    .collect::<Result<_>>()?,
                None => vec![1.0 / window.len() as f64; window.len()],
            };
            let n = parsed(cfg, "n")?.unwrap_or(1);
            let mut rows = Vec::new();
            for d in levels(cfg, "1/2")? {
                let inst = FiniteInstance::new(window.clone(), &probs, n, spec, d)?;
                let id = format!("d={}", format_rational(&d));
                match brute_force_rn(&inst) {
                    Ok(bf) => rows.push(ReportRow::new(&id, "rate", bf.rate, BoundType::Exact)),
                    Err(dsfc::Error::BudgetExceeded { .. }) => rows.push(ReportRow::budget_exceeded(&id, "rate")),
                    Err(e) => return Err(e.into()),
                }
                rows.push(ReportRow::new(&id, "relaxed_rd", blahut_arimoto_rd(&inst)?.rate, BoundType::Lower));
            }
            Ok(rows)
        }
        "conditions" => {
            let env = envelope_from(cfg)?.unwrap_or_else(|| EnvelopeSpec::geometric(0.5).unwrap());
            let d = level(cfg, "1")?;
            let window = symbols(cfg.get("window").unwrap_or("0,1,2"))?;
            let n_max: usize = parsed(cfg, "n_max")?.unwrap_or(2);
            let count: usize = parsed(cfg, "subfamily")?.unwrap_or(4);
            let hi = *window.iter().max().unwrap();
            let mut rng = rng_from_seed(seed);
            let family = (0..count)
                .map(|_| random_dominated_pmf(&env, hi, &mut rng))
                .collect::<dsfc::Result<Vec<_>>>()?;
            let parts = (1..=n_max)
                .map(|n| grid_block_partition(&window, n, &spec, d))
                .collect::<dsfc::Result<Vec<_>>>()?;
            Ok(theorem2_conditions(&env, &spec, d, &parts, &family)?.iter().flat_map(|r| r.rows()).collect())
        }
        other => Err(HarnessError::Config(format!(
            "unknown oracle task `{other}` (expected truncation, disjoint, tail-ratio, rn or conditions)"
        ))),
    }
}
