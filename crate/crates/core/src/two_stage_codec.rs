//! Two-stage D-semifaithful codec: a lossy first stage on S_k(xⁿ) over Γ_{k+1}
//! and a lossless second stage on O_k(xⁿ), reassembled letterwise by Ψ_k.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::distortion::{DistortionKind, DistortionLevel, DistortionSpec};
use crate::error::{Error, Result};
use crate::kv::{KvCodec, KvConfig};
use crate::rational::{format_rational, Rational};
use crate::source_models::{envelope_contains, first_violation, rng_from_seed, EnvelopeKind, EnvelopeSpec, Sampler, SourcePmf, Tail};
use crate::universal_codes::{BitReader, BitWriter, FirstStage, FirstStageMode, SecondStage, SecondStageMode};

pub const MAGIC: &[u8; 4] = b"DSFC";
pub const VERSION: u8 = 1;

/// S_k(x) = min(x, k + 1).
pub fn s_k(k: u64, x: u64) -> u64 {
    x.min(k + 1)
}

/// O_k(x) = 1 on Γ_k, x above k.
pub fn o_k(k: u64, x: u64) -> u64 {
    if x <= k { 1 } else { x }
}

/// Ψ_k(ŷ, z): z when it is an overflow symbol, ŷ when z is the marker.
pub fn psi_k(k: u64, yhat: u64, z: u64) -> Result<u64> {
    match z {
        z if z > k => Ok(z),
        1 => Ok(yhat),
        z => Err(Error::InvalidOverflowSymbol(z)),
    }
}

/// Truncation threshold: fixed, or a function of the block length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KSchedule {
    Fixed(u64),
    /// k_n = ⌈√(n / log₂(n+1))⌉.
    Sqrt,
    /// k_n = u_f(n).
    Uf,
}

impl KSchedule {
    pub fn resolve(&self, env: &EnvelopeSpec, n: u64) -> Result<u64> {
        match *self {
            KSchedule::Fixed(k) => Ok(k),
            KSchedule::Sqrt => Ok(sqrt_schedule(n)),
            KSchedule::Uf => env.u_f(n),
        }
    }

    /// Whether k_n → ∞ and k_n·log(n+1)/n → 0, decided from the envelope's analytic form.
    pub fn satisfies_growth_conditions(&self, env: &EnvelopeSpec) -> bool {
        match self {
            KSchedule::Fixed(_) => false,
            KSchedule::Sqrt => true,
            KSchedule::Uf => {
                let tail = match env.kind() {
                    EnvelopeKind::Polynomial { p } => Some(Tail::PowerLaw { scale: 1.0, exponent: *p }),
                    EnvelopeKind::Exponential { scale, base } => Some(Tail::Geometric { scale: *scale, base: *base }),
                    EnvelopeKind::Tabulated { tail, .. } => tail.clone(),
                };
                match tail {
                    // u_f(n) grows like log n.
                    Some(Tail::Geometric { .. }) => true,
                    // u_f(n) grows like n^{1/(p−1)}.
                    Some(Tail::PowerLaw { exponent, .. }) => exponent > 2.0,
                    // Finite support: u_f stays bounded.
                    None => false,
                }
            }
        }
    }
}

pub fn sqrt_schedule(n: u64) -> u64 {
    let v = (n as f64 / ((n + 1) as f64).log2()).sqrt().ceil() as u64;
    v.max(1)
}

impl fmt::Display for KSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KSchedule::Fixed(k) => write!(f, "{k}"),
            KSchedule::Sqrt => f.write_str("sqrt"),
            KSchedule::Uf => f.write_str("u_f"),
        }
    }
}

impl FromStr for KSchedule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" | "sqrt-schedule" => Ok(KSchedule::Sqrt),
            "u_f" | "uf" => Ok(KSchedule::Uf),
            other => other
                .strip_prefix("fixed:")
                .unwrap_or(other)
                .parse()
                .map(KSchedule::Fixed)
                .map_err(|_| Error::ConfigInvalid(format!("unknown k schedule '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodecConfig {
    pub env: EnvelopeSpec,
    pub spec: DistortionSpec,
    pub d: Rational,
    pub k: KSchedule,
    pub n: u64,
    /// Smallest symbol of the alphabet.
    pub floor: u64,
    pub first_stage: FirstStageMode,
    pub second_stage: SecondStageMode,
}

impl CodecConfig {
    pub fn new(env: EnvelopeSpec, spec: DistortionSpec, d: Rational, k: KSchedule, n: u64) -> Self {
        CodecConfig {
            env,
            spec,
            d,
            k,
            n,
            floor: 0,
            first_stage: FirstStageMode::Grid,
            second_stage: SecondStageMode::PerSymbol,
        }
    }

    pub fn with_floor(mut self, floor: u64) -> Self {
        self.floor = floor;
        self
    }

    pub fn with_modes(mut self, first: FirstStageMode, second: SecondStageMode) -> Self {
        self.first_stage = first;
        self.second_stage = second;
        self
    }

    pub fn threshold(&self) -> Result<u64> {
        self.k.resolve(&self.env, self.n)
    }

    pub fn validate(&self) -> Result<u64> {
        if self.n == 0 || self.n > u32::MAX as u64 {
            return Err(Error::ConfigInvalid(format!("block length {} out of range", self.n)));
        }
        DistortionLevel::new(self.d, &self.spec).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        if !self.env.is_summable() {
            return Err(Error::NotSummable);
        }
        let k = self.threshold()?;
        if k == 0 || k < self.floor || k >= u32::MAX as u64 {
            return Err(Error::ConfigInvalid(format!("threshold k = {k} must satisfy max(1, floor) <= k")));
        }
        Ok(k)
    }
}

/// Envelope descriptor carried in stream headers.
pub fn envelope_id(env: &EnvelopeSpec) -> String {
    env.to_kv().to_compact()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamHeader {
    pub version: u8,
    pub first_stage: FirstStageMode,
    pub second_stage: SecondStageMode,
    pub floor: u64,
    pub n: u32,
    pub k: u32,
    pub d: Rational,
    pub spec: DistortionSpec,
    pub envelope_id: String,
    pub payload_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedStream {
    pub header: StreamHeader,
    pub payload: Vec<u8>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::MalformedStream("stream ended inside the header".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn i128(&mut self) -> Result<i128> {
        Ok(i128::from_be_bytes(self.take(16)?.try_into().unwrap()))
    }
    fn rational(&mut self) -> Result<Rational> {
        let num = self.i128()?;
        let den = self.i128()?;
        if den <= 0 {
            return Err(Error::MalformedStream("nonpositive denominator".into()));
        }
        Ok(Rational::new(num, den))
    }
}

fn put_rational(out: &mut Vec<u8>, r: &Rational) {
    out.extend_from_slice(&r.numer().to_be_bytes());
    out.extend_from_slice(&r.denom().to_be_bytes());
}

impl EncodedStream {
    pub fn payload_bits(&self) -> u64 {
        self.header.payload_bits
    }

    /// Container layout: magic, version, mode bytes, floor, n, k, d, distortion,
    /// envelope descriptor, payload bit count, payload (zero padded to a byte).
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(96 + self.payload.len());
        out.extend_from_slice(MAGIC);
        out.push(h.version);
        out.push(h.first_stage.id());
        out.push(h.second_stage.id());
        out.extend_from_slice(&h.floor.to_be_bytes());
        out.extend_from_slice(&h.n.to_be_bytes());
        out.extend_from_slice(&h.k.to_be_bytes());
        put_rational(&mut out, &h.d);
        match h.spec.kind() {
            DistortionKind::Absolute => out.push(0),
            DistortionKind::Bounded { scale, cap } => {
                out.push(1);
                put_rational(&mut out, &scale);
                out.extend_from_slice(&cap.to_be_bytes());
            }
        }
        let id = h.envelope_id.as_bytes();
        out.extend_from_slice(&(id.len() as u16).to_be_bytes());
        out.extend_from_slice(id);
        out.extend_from_slice(&h.payload_bits.to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut c = Cursor { bytes, pos: 0 };
        if c.take(4)? != MAGIC {
            return Err(Error::MalformedStream("bad magic".into()));
        }
        let version = c.u8()?;
        if version != VERSION {
            return Err(Error::MalformedStream(format!("unsupported version {version}")));
        }
        let first_stage = FirstStageMode::from_id(c.u8()?)?;
        let second_stage = SecondStageMode::from_id(c.u8()?)?;
        let floor = c.u64()?;
        let n = c.u32()?;
        let k = c.u32()?;
        let d = c.rational()?;
        let spec = match c.u8()? {
            0 => DistortionSpec::absolute(),
            1 => {
                let scale = c.rational()?;
                let cap = c.u64()?;
                DistortionSpec::bounded(scale, cap).map_err(|e| Error::MalformedStream(e.to_string()))?
            }
            t => return Err(Error::MalformedStream(format!("unknown distortion kind {t}"))),
        };
        let len = c.u16()? as usize;
        let envelope_id = String::from_utf8(c.take(len)?.to_vec())
            .map_err(|_| Error::MalformedStream("envelope descriptor is not UTF-8".into()))?;
        let payload_bits = c.u64()?;
        let need = payload_bits.div_ceil(8) as usize;
        let rest = &bytes[c.pos..];
        if rest.len() < need {
            return Err(Error::MalformedStream(format!(
                "payload has {} bytes, header declares {payload_bits} bits",
                rest.len()
            )));
        }
        if rest.len() > need {
            return Err(Error::TrailingBits(((rest.len() - need) * 8) as u64));
        }
        let header =
            StreamHeader { version, first_stage, second_stage, floor, n, k, d, spec, envelope_id, payload_bits };
        Ok(EncodedStream { header, payload: rest.to_vec() })
    }

    /// Codec configuration reconstructed from the header alone.
    pub fn config(&self) -> Result<CodecConfig> {
        let h = &self.header;
        let kv = KvConfig::from_compact("", &h.envelope_id)
            .map_err(|e| Error::MalformedStream(format!("envelope descriptor: {e}")))?;
        let env = EnvelopeSpec::from_kv(&kv).map_err(|e| Error::MalformedStream(format!("envelope descriptor: {e}")))?;
        Ok(CodecConfig {
            env,
            spec: h.spec,
            d: h.d,
            k: KSchedule::Fixed(h.k as u64),
            n: h.n as u64,
            floor: h.floor,
            first_stage: h.first_stage,
            second_stage: h.second_stage,
        })
    }
}

/// Per-block record of the intermediate sequences and stage lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodeTrace {
    pub y: Vec<u64>,
    pub yhat: Vec<u64>,
    pub z: Vec<u64>,
    pub xhat: Vec<u64>,
    pub first_bits: u64,
    pub second_bits: u64,
    /// ρ_n(x, x̂).
    pub rho: Rational,
    /// ρ̃_n(y, ŷ) under ρ^k on Γ_{k+1}.
    pub rho_tilde: Rational,
}

/// Immutable encoder/decoder for one configuration.
#[derive(Debug, Clone)]
pub struct TwoStageCodec {
    cfg: CodecConfig,
    k: u64,
    first: FirstStage,
    second: SecondStage,
    envelope_id: String,
}

impl TwoStageCodec {
    pub fn new(cfg: CodecConfig) -> Result<Self> {
        let k = cfg.validate()?;
        let first = FirstStage::new(cfg.floor, k, cfg.n, cfg.spec, cfg.d, cfg.first_stage)?;
        let second = SecondStage::new(&cfg.env, k, cfg.second_stage)?;
        let envelope_id = envelope_id(&cfg.env);
        if envelope_id.len() > u16::MAX as usize {
            return Err(Error::ConfigInvalid("envelope descriptor too long for the header".into()));
        }
        Ok(TwoStageCodec { cfg, k, first, second, envelope_id })
    }

    pub fn config(&self) -> &CodecConfig {
        &self.cfg
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn first_stage(&self) -> &FirstStage {
        &self.first
    }

    pub fn second_stage(&self) -> &SecondStage {
        &self.second
    }

    fn header(&self, payload_bits: u64) -> StreamHeader {
        StreamHeader {
            version: VERSION,
            first_stage: self.cfg.first_stage,
            second_stage: self.cfg.second_stage,
            floor: self.cfg.floor,
            n: self.cfg.n as u32,
            k: self.k as u32,
            d: self.cfg.d,
            spec: self.cfg.spec,
            envelope_id: self.envelope_id.clone(),
            payload_bits,
        }
    }

    pub fn encode(&self, x: &[u64]) -> Result<EncodedStream> {
        Ok(self.encode_with_trace(x)?.0)
    }

    pub fn encode_with_trace(&self, x: &[u64]) -> Result<(EncodedStream, EncodeTrace)> {
        if x.len() as u64 != self.cfg.n {
            return Err(Error::ConfigInvalid(format!("block has {} symbols, configured n = {}", x.len(), self.cfg.n)));
        }
        if let Some(&s) = x.iter().find(|&&s| s < self.cfg.floor) {
            return Err(Error::ConfigInvalid(format!("symbol {s} lies below the support floor {}", self.cfg.floor)));
        }
        let k = self.k;
        let y: Vec<u64> = x.iter().map(|&s| s_k(k, s)).collect();
        let z: Vec<u64> = x.iter().map(|&s| o_k(k, s)).collect();
        let mut w = BitWriter::new();
        let yhat = self.first.encode(&y, &mut w)?;
        let first_bits = w.len();
        self.second.encode(&z, &mut w)?;
        let second_bits = w.len() - first_bits;
        let xhat = yhat.iter().zip(&z).map(|(&a, &b)| psi_k(k, a, b)).collect::<Result<Vec<_>>>()?;
        let rho_tilde = self.cfg.spec.rho_truncated_block(k, &y, &yhat)?;
        let rho = self.cfg.spec.rho_block(x, &xhat)?;
        if rho_tilde > self.cfg.d || rho > rho_tilde {
            return Err(Error::InvalidDistortion(format!(
                "reconstruction exceeds d: rho = {}, rho~ = {}",
                format_rational(&rho),
                format_rational(&rho_tilde)
            )));
        }
        let payload_bits = w.len();
        let stream = EncodedStream { header: self.header(payload_bits), payload: w.into_bytes() };
        let trace = EncodeTrace { y, yhat, z, xhat, first_bits, second_bits, rho, rho_tilde };
        Ok((stream, trace))
    }

    pub fn decode(&self, stream: &EncodedStream) -> Result<Vec<u64>> {
        let mut expect = self.header(stream.header.payload_bits);
        expect.version = stream.header.version;
        if stream.header != expect {
            return Err(Error::MalformedStream("header does not match the codec configuration".into()));
        }
        let bits = stream.header.payload_bits;
        if (stream.payload.len() as u64) < bits.div_ceil(8) {
            return Err(Error::MalformedStream("payload shorter than declared".into()));
        }
        let mut r = BitReader::new(&stream.payload, bits);
        let yhat = self.first.decode(&mut r)?;
        let z = self.second.decode(self.cfg.n as usize, &mut r)?;
        if r.remaining() > 0 {
            return Err(Error::TrailingBits(r.remaining()));
        }
        yhat.iter().zip(&z).map(|(&a, &b)| psi_k(self.k, a, b)).collect()
    }
}

pub fn encode(cfg: &CodecConfig, x: &[u64]) -> Result<EncodedStream> {
    TwoStageCodec::new(cfg.clone())?.encode(x)
}

pub fn decode(cfg: &CodecConfig, stream: &EncodedStream) -> Result<Vec<u64>> {
    TwoStageCodec::new(cfg.clone())?.decode(stream)
}

/// Decodes using only the information in the stream header.
pub fn decode_self_contained(stream: &EncodedStream) -> Result<Vec<u64>> {
    TwoStageCodec::new(stream.config()?)?.decode(stream)
}

/// Monte-Carlo rate in bits per sample, split by stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub trials: usize,
    pub n: u64,
    pub total: f64,
    pub first: f64,
    pub second: f64,
    /// Standard error of `total`.
    pub stderr: f64,
    pub first_stderr: f64,
    pub second_stderr: f64,
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Seed of trial `t` in a stream started from `seed`.
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    seed ^ t.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn measured_rate(cfg: &CodecConfig, pmf: &SourcePmf, trials: usize, seed: u64) -> Result<RateEstimate> {
    if !envelope_contains(&cfg.env, pmf)? {
        let x = first_violation(&cfg.env, pmf)?.unwrap_or(0);
        return Err(Error::EnvelopeViolation(x));
    }
    let codec = TwoStageCodec::new(cfg.clone())?;
    measured_rate_with(&codec, pmf, trials, seed)
}

/// As [`measured_rate`] for an already built codec, without the membership check.
pub fn measured_rate_with(codec: &TwoStageCodec, pmf: &SourcePmf, trials: usize, seed: u64) -> Result<RateEstimate> {
    if trials == 0 {
        return Err(Error::ConfigInvalid("trials must be >= 1".into()));
    }
    let n = codec.cfg.n;
    let sampler = Sampler::new(pmf);
    let lens = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from_seed(trial_seed(seed, t));
            let x = sampler.sample_block(&mut rng, n as usize);
            let (_, tr) = codec.encode_with_trace(&x)?;
            Ok((tr.first_bits as f64 / n as f64, tr.second_bits as f64 / n as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    let totals: Vec<f64> = lens.iter().map(|(a, b)| a + b).collect();
    let firsts: Vec<f64> = lens.iter().map(|p| p.0).collect();
    let seconds: Vec<f64> = lens.iter().map(|p| p.1).collect();
    let (total, stderr) = mean_se(&totals);
    let (first, first_stderr) = mean_se(&firsts);
    let (second, second_stderr) = mean_se(&seconds);
    Ok(RateEstimate { trials, n, total, first, second, stderr, first_stderr, second_stderr })
}

/// d as an exact rational, rejecting negative values.
pub fn parse_level(s: &str) -> Result<Rational> {
    let d = crate::rational::parse_rational(s)?;
    if d.is_negative() || d.is_zero() {
        return Err(Error::InvalidDistortion(format!("d = {s} must be positive")));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::source_models::sample_block;

    fn geometric_cfg(n: u64, k: u64, d: Rational) -> CodecConfig {
        CodecConfig::new(EnvelopeSpec::geometric(0.5).unwrap(), DistortionSpec::absolute(), d, KSchedule::Fixed(k), n)
    }

    #[test]
    fn letter_maps() {
        assert_eq!((s_k(3, 2), s_k(3, 5), s_k(3, 3)), (2, 4, 3));
        assert_eq!((o_k(3, 2), o_k(3, 5), o_k(3, 3)), (1, 5, 1));
        assert_eq!(psi_k(3, 2, 1), Ok(2));
        assert_eq!(psi_k(3, 4, 7), Ok(7));
        assert_eq!(psi_k(3, 1, 2), Err(Error::InvalidOverflowSymbol(2)));
    }

    #[test]
    fn overflow_symbol_passes_through() {
        let codec = TwoStageCodec::new(geometric_cfg(1, 3, rat(1, 1))).unwrap();
        let s = codec.encode(&[5]).unwrap();
        assert_eq!(codec.decode(&s).unwrap(), vec![5]);
    }

    #[test]
    fn grid_pair_within_d() {
        let codec = TwoStageCodec::new(geometric_cfg(2, 3, rat(1, 1))).unwrap();
        let (s, tr) = codec.encode_with_trace(&[1, 2]).unwrap();
        let xhat = codec.decode(&s).unwrap();
        assert_eq!(xhat, tr.xhat);
        assert!(DistortionSpec::absolute().rho_block(&[1, 2], &xhat).unwrap() <= rat(1, 1));
        assert_eq!(s.payload_bits(), tr.first_bits + tr.second_bits);
    }

    #[test]
    fn container_roundtrip_and_errors() {
        let codec = TwoStageCodec::new(geometric_cfg(16, 4, rat(1, 2))).unwrap();
        let x = sample_block(&SourcePmf::geometric(0.5).unwrap(), 16, 3);
        let s = codec.encode(&x).unwrap();
        let bytes = s.to_bytes();
        let back = EncodedStream::from_bytes(&bytes).unwrap();
        assert_eq!(back, s);
        assert_eq!(decode_self_contained(&back).unwrap(), codec.decode(&s).unwrap());
        assert_eq!(codec.encode(&x).unwrap().to_bytes(), bytes);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(EncodedStream::from_bytes(&bad), Err(Error::MalformedStream(_))));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(EncodedStream::from_bytes(&long), Err(Error::TrailingBits(8))));
        assert!(matches!(EncodedStream::from_bytes(&bytes[..bytes.len() - 1]), Err(Error::MalformedStream(_))));

        let mut extra = s.clone();
        extra.header.payload_bits += 8;
        extra.payload.push(0);
        assert_eq!(codec.decode(&extra), Err(Error::TrailingBits(8)));
    }

    #[test]
    fn rejects_symbols_below_floor_and_bad_configs() {
        let codec = TwoStageCodec::new(geometric_cfg(2, 3, rat(1, 1)).with_floor(1)).unwrap();
        assert!(matches!(codec.encode(&[0, 1]), Err(Error::ConfigInvalid(_))));
        assert!(matches!(codec.encode(&[1]), Err(Error::ConfigInvalid(_))));
        let heavy = CodecConfig::new(
            EnvelopeSpec::polynomial(1.0).unwrap(),
            DistortionSpec::absolute(),
            rat(1, 1),
            KSchedule::Sqrt,
            8,
        );
        assert_eq!(TwoStageCodec::new(heavy).err(), Some(Error::NotSummable));
    }

    #[test]
    fn schedules() {
        assert_eq!(sqrt_schedule(1), 1);
        assert_eq!(sqrt_schedule(1024), 11);
        assert_eq!("sqrt".parse::<KSchedule>().unwrap(), KSchedule::Sqrt);
        assert_eq!("fixed:7".parse::<KSchedule>().unwrap(), KSchedule::Fixed(7));
        let geo = EnvelopeSpec::geometric(0.5).unwrap();
        assert!(KSchedule::Uf.satisfies_growth_conditions(&geo));
        assert!(!KSchedule::Uf.satisfies_growth_conditions(&EnvelopeSpec::polynomial(1.5).unwrap()));
        assert!(KSchedule::Sqrt.satisfies_growth_conditions(&geo));
        // k_n log(n+1)/n decreases along the built-in schedule.
        let r = |n: u64| sqrt_schedule(n) as f64 * ((n + 1) as f64).log2() / n as f64;
        assert!(r(1 << 20) < r(1 << 10) && r(1 << 10) < r(1 << 5));
    }

    #[test]
    fn point_mass_rate_is_exact_codeword_length() {
        let cfg = geometric_cfg(1, 3, rat(1, 1));
        // f(0) = 1 for the geometric envelope, so the point mass at 0 lies in the family.
        let pmf = SourcePmf::point_mass(0);
        let est = measured_rate(&cfg, &pmf, 5, 1).unwrap();
        let codec = TwoStageCodec::new(cfg).unwrap();
        assert_eq!(est.total, codec.encode(&[0]).unwrap().payload_bits() as f64);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn envelope_violation_detected() {
        let cfg = CodecConfig::new(
            EnvelopeSpec::polynomial(2.0).unwrap(),
            DistortionSpec::absolute(),
            rat(1, 1),
            KSchedule::Fixed(3),
            4,
        );
        let pmf = SourcePmf::geometric(0.5).unwrap();
        assert_eq!(measured_rate(&cfg, &pmf, 4, 0), Err(Error::EnvelopeViolation(3)));
    }
}
