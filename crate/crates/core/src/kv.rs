//! Flat `key = value` text config used for envelope, pmf and distortion descriptors.

use std::fmt;
use std::str::FromStr;

use crate::distortion::{DistortionKind, DistortionSpec};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::source_models::{EnvelopeKind, EnvelopeSpec, SourcePmf, Tail};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvConfig {
    entries: Vec<(String, String)>,
}

impl KvConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = KvConfig::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(k.trim(), v.trim());
        }
        Ok(cfg)
    }

    /// Parses `kind:key=value,key=value` into `prefix.kind`, `prefix.key`, ….
    pub fn from_compact(prefix: &str, s: &str) -> Result<Self> {
        let mut cfg = KvConfig::new();
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        cfg.set(&join(prefix, "kind"), kind.trim());
        for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value in `{part}`")))?;
            cfg.set(&join(prefix, k.trim()), v.trim());
        }
        Ok(cfg)
    }

    /// Inverse of [`KvConfig::from_compact`] for an unprefixed config.
    pub fn to_compact(&self) -> String {
        let kind = self.get("kind").unwrap_or("");
        let rest: Vec<String> =
            self.entries.iter().filter(|(k, _)| k != "kind").map(|(k, v)| format!("{k}={v}")).collect();
        if rest.is_empty() {
            kind.to_string()
        } else {
            format!("{kind}:{}", rest.join(","))
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Parse(format!("missing key `{key}`")))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| Error::Parse(format!("bad value `{v}` for `{key}`"))))
            .transpose()
    }

    pub fn require_parsed<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parsed(key)?.ok_or_else(|| Error::Parse(format!("missing key `{key}`")))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Entries under `prefix.`, with the prefix stripped.
    pub fn section(&self, prefix: &str) -> KvConfig {
        let p = format!("{prefix}.");
        KvConfig {
            entries: self
                .entries
                .iter()
                .filter_map(|(k, v)| k.strip_prefix(&p).map(|s| (s.to_string(), v.clone())))
                .collect(),
        }
    }

    pub fn merge(&mut self, other: &KvConfig) {
        for (k, v) in &other.entries {
            self.set(k, v.clone());
        }
    }

    pub fn with_prefix(&self, prefix: &str) -> KvConfig {
        KvConfig {
            entries: self.entries.iter().map(|(k, v)| (join(prefix, k), v.clone())).collect(),
        }
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

impl fmt::Display for KvConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

fn float(v: f64) -> String {
    format!("{v:?}")
}

fn floats(vs: &[f64]) -> String {
    vs.iter().map(|v| float(*v)).collect::<Vec<_>>().join(" ")
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{t}`"))))
        .collect()
}

pub trait KvCodec: Sized {
    fn to_kv(&self) -> KvConfig;
    fn from_kv(cfg: &KvConfig) -> Result<Self>;
}

fn tail_to_kv(tail: Option<&Tail>, cfg: &mut KvConfig) {
    match tail {
        None => cfg.set("tail.kind", "none"),
        Some(Tail::Geometric { scale, base }) => {
            cfg.set("tail.kind", "geometric");
            cfg.set("tail.scale", float(*scale));
            cfg.set("tail.base", float(*base));
        }
        Some(Tail::PowerLaw { scale, exponent }) => {
            cfg.set("tail.kind", "power-law");
            cfg.set("tail.scale", float(*scale));
            cfg.set("tail.exponent", float(*exponent));
        }
    }
}

fn tail_from_kv(cfg: &KvConfig) -> Result<Option<Tail>> {
    match cfg.get("tail.kind").unwrap_or("none") {
        "none" => Ok(None),
        "geometric" => Ok(Some(Tail::Geometric {
            scale: cfg.require_parsed("tail.scale")?,
            base: cfg.require_parsed("tail.base")?,
        })),
        "power-law" => Ok(Some(Tail::PowerLaw {
            scale: cfg.require_parsed("tail.scale")?,
            exponent: cfg.require_parsed("tail.exponent")?,
        })),
        other => Err(Error::Parse(format!("unknown tail kind `{other}`"))),
    }
}

impl KvCodec for EnvelopeSpec {
    fn to_kv(&self) -> KvConfig {
        let mut cfg = KvConfig::new();
        match self.kind() {
            EnvelopeKind::Polynomial { p } => {
                cfg.set("kind", "polynomial");
                cfg.set("p", float(*p));
            }
            EnvelopeKind::Exponential { scale, base } => {
                cfg.set("kind", "exponential");
                cfg.set("K", float(*scale));
                cfg.set("base", float(*base));
            }
            EnvelopeKind::Tabulated { values, tail } => {
                cfg.set("kind", "tabulated");
                cfg.set("values", floats(values));
                tail_to_kv(tail.as_ref(), &mut cfg);
            }
        }
        cfg
    }

    fn from_kv(cfg: &KvConfig) -> Result<Self> {
        match cfg.require("kind")? {
            "polynomial" => EnvelopeSpec::polynomial(cfg.require_parsed("p")?),
            "exponential" => {
                let k: f64 = cfg.parsed("K")?.unwrap_or(1.0);
                match (cfg.parsed::<f64>("base")?, cfg.parsed::<f64>("alpha")?) {
                    (Some(b), _) => EnvelopeSpec::new(EnvelopeKind::Exponential { scale: k, base: b }),
                    (None, Some(a)) => EnvelopeSpec::exponential(k, a),
                    (None, None) => Err(Error::Parse("exponential envelope needs base or alpha".into())),
                }
            }
            "geometric" => EnvelopeSpec::geometric(cfg.require_parsed("ratio")?),
            "tabulated" => EnvelopeSpec::tabulated(parse_floats(cfg.require("values")?)?, tail_from_kv(cfg)?),
            other => Err(Error::Parse(format!("unknown envelope kind `{other}`"))),
        }
    }
}

impl KvCodec for SourcePmf {
    fn to_kv(&self) -> KvConfig {
        let mut cfg = KvConfig::new();
        cfg.set("kind", "table");
        cfg.set("floor", self.floor().to_string());
        cfg.set("probs", floats(self.probs()));
        tail_to_kv(self.tail(), &mut cfg);
        cfg
    }

    fn from_kv(cfg: &KvConfig) -> Result<Self> {
        match cfg.require("kind")? {
            "table" => SourcePmf::new(
                cfg.parsed("floor")?.unwrap_or(0),
                parse_floats(cfg.get("probs").unwrap_or(""))?,
                tail_from_kv(cfg)?,
            ),
            "geometric" => SourcePmf::geometric(cfg.require_parsed("ratio")?),
            "point" => Ok(SourcePmf::point_mass(cfg.require_parsed("symbol")?)),
            "uniform" => {
                let lo: u64 = cfg.require_parsed("lo")?;
                let hi: u64 = cfg.require_parsed("hi")?;
                if hi < lo {
                    return Err(Error::Parse("uniform needs lo <= hi".into()));
                }
                Ok(SourcePmf::uniform(lo, hi))
            }
            other => Err(Error::Parse(format!("unknown pmf kind `{other}`"))),
        }
    }
}

impl KvCodec for DistortionSpec {
    fn to_kv(&self) -> KvConfig {
        let mut cfg = KvConfig::new();
        match self.kind() {
            DistortionKind::Absolute => cfg.set("kind", "absolute"),
            DistortionKind::Bounded { scale, cap } => {
                cfg.set("kind", "bounded");
                cfg.set("K", format_rational(&scale));
                cfg.set("M", cap.to_string());
            }
        }
        cfg
    }

    fn from_kv(cfg: &KvConfig) -> Result<Self> {
        match cfg.require("kind")? {
            "absolute" => Ok(DistortionSpec::absolute()),
            "bounded" => DistortionSpec::bounded(
                parse_rational(cfg.require("K")?)?,
                cfg.require_parsed("M")?,
            ),
            other => Err(Error::Parse(format!("unknown distortion kind `{other}`"))),
        }
    }
}

pub fn rational_value(cfg: &KvConfig, key: &str) -> Result<Option<Rational>> {
    cfg.get(key).map(parse_rational).transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn parse_and_render() {
        let cfg = KvConfig::parse("# header\nkind = polynomial\n p = 2 # exponent\n\n").unwrap();
        assert_eq!(cfg.get("kind"), Some("polynomial"));
        assert_eq!(cfg.get("p"), Some("2"));
        assert_eq!(KvConfig::parse(&cfg.to_string()).unwrap(), cfg);
        assert!(KvConfig::parse("novalue").is_err());
    }

    #[test]
    fn compact_form() {
        let cfg = KvConfig::from_compact("envelope", "exponential:K=2,alpha=1").unwrap();
        let env = EnvelopeSpec::from_kv(&cfg.section("envelope")).unwrap();
        assert_eq!(env, EnvelopeSpec::exponential(2.0, 1.0).unwrap());
        let back = KvConfig::from_compact("", &env.to_kv().to_compact()).unwrap();
        assert_eq!(EnvelopeSpec::from_kv(&back).unwrap(), env);
    }

    #[test]
    fn envelope_roundtrip() {
        for env in [
            EnvelopeSpec::polynomial(2.0).unwrap(),
            EnvelopeSpec::exponential(2.0, 1.0).unwrap(),
            EnvelopeSpec::geometric(0.5).unwrap(),
            EnvelopeSpec::tabulated(vec![0.6, 0.3], Some(Tail::PowerLaw { scale: 1.0, exponent: 2.5 })).unwrap(),
            EnvelopeSpec::tabulated(vec![1.0, 0.125], None).unwrap(),
        ] {
            assert_eq!(EnvelopeSpec::from_kv(&env.to_kv()).unwrap(), env);
        }
    }

    #[test]
    fn pmf_roundtrip() {
        let env = EnvelopeSpec::polynomial(2.0).unwrap();
        for pmf in [
            env.envelope_distribution().unwrap(),
            SourcePmf::geometric(0.3).unwrap(),
            SourcePmf::from_probs(2, vec![0.1, 0.2, 0.7]).unwrap(),
        ] {
            assert_eq!(SourcePmf::from_kv(&pmf.to_kv()).unwrap(), pmf);
        }
    }

    #[test]
    fn distortion_roundtrip() {
        for spec in [DistortionSpec::absolute(), DistortionSpec::bounded(rat(3, 2), 4).unwrap()] {
            assert_eq!(DistortionSpec::from_kv(&spec.to_kv()).unwrap(), spec);
        }
        let cfg = KvConfig::parse("kind = bounded\nK = 2/1\nM = 5\nd = 1/2").unwrap();
        assert_eq!(rational_value(&cfg, "d").unwrap(), Some(rat(1, 2)));
        assert!(DistortionSpec::from_kv(&KvConfig::parse("kind = bounded\nK = 0\nM = 5").unwrap()).is_err());
    }
}
