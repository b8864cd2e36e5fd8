use dsfc::distortion::DistortionSpec;
use dsfc::kv::{KvCodec, KvConfig};
use dsfc::rational::{parse_rational, Rational};
use dsfc::source_models::{EnvelopeSpec, SourcePmf};
use dsfc::two_stage_codec::{CodecConfig, KSchedule};
use dsfc::universal_codes::{FirstStageMode, SecondStageMode};

use crate::bound::RedundancyBound;
use crate::error::{HarnessError, Result};

/// Redundancy sweep parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub envelope: EnvelopeSpec,
    pub distortion: DistortionSpec,
    pub d: Rational,
    pub n_grid: Vec<u64>,
    pub schedule: KSchedule,
    /// Number of sampled members of Λ_f besides μ̃_f.
    pub subfamily: usize,
    /// Whether μ̃_f belongs to the subfamily.
    pub include_envelope: bool,
    /// Additional explicit subfamily members.
    pub extra: Vec<SourcePmf>,
    /// Sampled members live on {0, …, window}.
    pub window: u64,
    pub trials: usize,
    pub seed: u64,
    pub floor: u64,
    pub first_stage: FirstStageMode,
    pub second_stage: SecondStageMode,
    /// Supplied bound constants; fitted when absent.
    pub bound: Option<RedundancyBound>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            envelope: EnvelopeSpec::geometric(0.5).unwrap(),
            distortion: DistortionSpec::absolute(),
            d: Rational::from(1),
            n_grid: (4..=12).map(|e| 1u64 << e).collect(),
            schedule: KSchedule::Uf,
            subfamily: 8,
            include_envelope: true,
            extra: vec![],
            window: 24,
            trials: 200,
            seed: 1,
            floor: 0,
            first_stage: FirstStageMode::Covering,
            second_stage: SecondStageMode::Enumerative,
            bound: None,
        }
    }
}

fn cfg_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(e.to_string())
}

/// Reads a descriptor either from a compact `key` (`kind:k=v,…`) or from a `key.` section.
fn descriptor(cfg: &KvConfig, key: &str) -> Result<Option<KvConfig>> {
    if let Some(s) = cfg.get(key) {
        return Ok(Some(KvConfig::from_compact("", s).map_err(cfg_err)?));
    }
    let sec = cfg.section(key);
    Ok(if sec.get("kind").is_some() { Some(sec) } else { None })
}

pub fn envelope_from(cfg: &KvConfig) -> Result<Option<EnvelopeSpec>> {
    descriptor(cfg, "envelope")?.map(|c| EnvelopeSpec::from_kv(&c).map_err(cfg_err)).transpose()
}

pub fn distortion_from(cfg: &KvConfig) -> Result<Option<DistortionSpec>> {
    descriptor(cfg, "distortion")?.map(|c| DistortionSpec::from_kv(&c).map_err(cfg_err)).transpose()
}

pub fn parsed<T: std::str::FromStr>(cfg: &KvConfig, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    cfg.get(key)
        .map(|v| v.parse::<T>().map_err(|e| HarnessError::Config(format!("bad value `{v}` for `{key}`: {e}"))))
        .transpose()
}

/// Comma-separated sizes; `2^a..2^b` expands to the powers of two in between.
pub fn parse_n_grid(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let exp = |t: &str| -> Result<u32> {
                t.trim()
                    .strip_prefix("2^")
                    .and_then(|e| e.parse().ok())
                    .filter(|e: &u32| *e < 64)
                    .ok_or_else(|| HarnessError::Config(format!("bad power of two `{t}` in n-grid")))
            };
            let (lo, hi) = (exp(a)?, exp(b)?);
            out.extend((lo..=hi).map(|e| 1u64 << e));
        } else {
            out.push(item.parse().map_err(|_| HarnessError::Config(format!("bad n-grid entry `{item}`")))?);
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_kv(cfg: &KvConfig) -> Result<Self> {
        let mut e = ExperimentConfig::default();
        if let Some(env) = envelope_from(cfg)? {
            e.envelope = env;
        }
        if let Some(spec) = distortion_from(cfg)? {
            e.distortion = spec;
        }
        if let Some(d) = cfg.get("d") {
            e.d = parse_rational(d).map_err(cfg_err)?;
        }
        if let Some(g) = cfg.get("n_grid") {
            e.n_grid = parse_n_grid(g)?;
        }
        e.schedule = parsed(cfg, "schedule")?.unwrap_or(e.schedule);
        e.subfamily = parsed(cfg, "subfamily")?.unwrap_or(e.subfamily);
        e.include_envelope = parsed(cfg, "include_envelope")?.unwrap_or(e.include_envelope);
        if let Some(list) = cfg.get("extra") {
            e.extra = list
                .split(';')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| KvConfig::from_compact("", t).and_then(|c| SourcePmf::from_kv(&c)).map_err(cfg_err))
                .collect::<Result<_>>()?;
        }
        e.window = parsed(cfg, "window")?.unwrap_or(e.window);
        e.trials = parsed(cfg, "trials")?.unwrap_or(e.trials);
        e.seed = parsed(cfg, "seed")?.unwrap_or(e.seed);
        e.floor = parsed(cfg, "floor")?.unwrap_or(e.floor);
        e.first_stage = parsed(cfg, "first_stage")?.unwrap_or(e.first_stage);
        e.second_stage = parsed(cfg, "second_stage")?.unwrap_or(e.second_stage);
        let c: [Option<f64>; 3] = [parsed(cfg, "bound.c0")?, parsed(cfg, "bound.c1")?, parsed(cfg, "bound.c2")?];
        if c.iter().any(Option::is_some) {
            e.bound = Some(RedundancyBound::new(
                c[0].unwrap_or(0.0),
                c[1].unwrap_or(0.0),
                c[2].unwrap_or(0.0),
            )?);
        }
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(HarnessError::Config("n-grid is empty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) || self.n_grid[0] == 0 {
            return Err(HarnessError::Config("n-grid must be positive and strictly ascending".into()));
        }
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be >= 1".into()));
        }
        if self.subfamily == 0 && !self.include_envelope && self.extra.is_empty() {
            return Err(HarnessError::Config("subfamily is empty".into()));
        }
        Ok(())
    }

    pub fn codec_config(&self, n: u64) -> CodecConfig {
        CodecConfig::new(self.envelope.clone(), self.distortion, self.d, self.schedule, n)
            .with_floor(self.floor)
            .with_modes(self.first_stage, self.second_stage)
    }
}

/// Codec parameters read from a config file, for encode and decode.
pub fn codec_config_from(cfg: &KvConfig, n: u64) -> Result<CodecConfig> {
    let env = envelope_from(cfg)?.ok_or_else(|| HarnessError::Config("missing envelope".into()))?;
    let spec = distortion_from(cfg)?.unwrap_or_else(DistortionSpec::absolute);
    let d = dsfc::two_stage_codec::parse_level(cfg.get("d").ok_or_else(|| HarnessError::Config("missing d".into()))?)
        .map_err(cfg_err)?;
    let k: KSchedule = parsed(cfg, "k")?.or(parsed(cfg, "schedule")?).unwrap_or(KSchedule::Uf);
    let first = parsed(cfg, "first_stage")?.unwrap_or(FirstStageMode::Grid);
    let second = parsed(cfg, "second_stage")?.unwrap_or(SecondStageMode::PerSymbol);
    let floor = parsed(cfg, "floor")?.unwrap_or(0);
    Ok(CodecConfig::new(env, spec, d, k, n).with_floor(floor).with_modes(first, second))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_n_grid("2^4..2^6").unwrap(), vec![16, 32, 64]);
        assert_eq!(parse_n_grid("1, 2,8 ,64").unwrap(), vec![1, 2, 8, 64]);
        assert_eq!(parse_n_grid("3,2^1..2^2").unwrap(), vec![3, 2, 4]);
        assert!(parse_n_grid("2^x..2^3").is_err());
        assert!(parse_n_grid("ten").is_err());
    }

    #[test]
    fn config_file() {
        let kv = KvConfig::parse(
            "envelope = polynomial:p=2\ndistortion = bounded:K=1,M=3\nd = 1/2\nn_grid = 2^3..2^5\n\
             schedule = sqrt\ntrials = 5\nextra = point:symbol=1; uniform:lo=1,hi=2\nbound.c0 = 1\n",
        )
        .unwrap();
        let e = ExperimentConfig::from_kv(&kv).unwrap();
        assert_eq!(e.envelope, EnvelopeSpec::polynomial(2.0).unwrap());
        assert_eq!(e.d, Rational::new(1, 2));
        assert_eq!(e.n_grid, vec![8, 16, 32]);
        assert_eq!(e.schedule, KSchedule::Sqrt);
        assert_eq!(e.extra.len(), 2);
        assert_eq!(e.bound, Some(RedundancyBound::new(1.0, 0.0, 0.0).unwrap()));
    }

    #[test]
    fn invariants() {
        let bad = KvConfig::parse("n_grid = 32,16").unwrap();
        assert!(matches!(ExperimentConfig::from_kv(&bad), Err(HarnessError::Config(_))));
        let bad = KvConfig::parse("trials = 0").unwrap();
        assert!(ExperimentConfig::from_kv(&bad).is_err());
        let sec = KvConfig::parse("envelope.kind = exponential\nenvelope.K = 2\nenvelope.alpha = 1\n").unwrap();
        let e = ExperimentConfig::from_kv(&sec).unwrap();
        assert_eq!(e.envelope, EnvelopeSpec::exponential(2.0, 1.0).unwrap());
    }
}
