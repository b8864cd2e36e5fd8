use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use dsfc::kv::KvConfig;
use dsfc::oracles::{BoundType, ReportRow};
use dsfc::rational::{format_rational, to_f64};
use dsfc::source_models::{entropy, tail_ratio_reference};
use dsfc::two_stage_codec::{decode_self_contained, EncodedStream, TwoStageCodec};
use dsfc_harness::config::{envelope_from, parse_n_grid};
use dsfc_harness::oracle_report::run_oracle;
use dsfc_harness::sweep::run_sweep;
use dsfc_harness::{any_budget_rows, write_csv, ExperimentConfig, HarnessError};

#[derive(Parser, Debug)]
#[command(name = "dsfc", version, about = "Two-stage D-semifaithful coding of integer sources")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Key-value config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma list of block lengths; `2^a..2^b` expands to powers of two.
    #[arg(long, global = true)]
    n_grid: Option<String>,
    /// Distortion level as an exact rational, e.g. `1/2`.
    #[arg(long, global = true)]
    d: Option<String>,
    /// Envelope descriptor, e.g. `geometric:ratio=0.5` or `polynomial:p=2`.
    #[arg(long, global = true)]
    envelope: Option<String>,
    /// Truncation schedule: `u_f`, `sqrt`, or a fixed k.
    #[arg(long, global = true)]
    schedule: Option<String>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Exit 0 even when some rows exceed an enumeration budget.
    #[arg(long, global = true)]
    allow_partial: bool,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode a file of whitespace-separated symbols.
    Encode { input: PathBuf },
    /// Decode a stream file back to symbols.
    Decode {
        input: PathBuf,
        /// Original symbols, to report the achieved distortion.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Redundancy sweep over the n-grid, as CSV.
    Sweep,
    /// Oracle report, as CSV.
    Oracle {
        /// truncation, disjoint, tail-ratio, rn or conditions.
        #[arg(long)]
        task: Option<String>,
    },
    /// Envelope summary: τ_f, u_f over the n-grid and related constants, as CSV.
    EnvelopeInfo,
}

impl Common {
    fn kv(&self) -> Result<KvConfig> {
        let mut kv = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                KvConfig::parse(&text).map_err(|e| HarnessError::Config(e.to_string()))?
            }
            None => KvConfig::new(),
        };
        let overrides = [
            ("seed", self.seed.map(|s| s.to_string())),
            ("n_grid", self.n_grid.clone()),
            ("d", self.d.clone()),
            ("envelope", self.envelope.clone()),
            ("schedule", self.schedule.clone()),
            ("trials", self.trials.map(|t| t.to_string())),
        ];
        for (k, v) in overrides {
            if let Some(v) = v {
                kv.set(k, v);
            }
        }
        Ok(kv)
    }

    fn write(&self, bytes: &[u8]) -> Result<()> {
        match &self.out {
            Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
            None => Ok(std::io::stdout().write_all(bytes)?),
        }
    }

    /// Writes the CSV and reports whether budget-marked rows make the run partial.
    fn emit(&self, rows: &[ReportRow]) -> Result<()> {
        let mut buf = Vec::new();
        write_csv(rows, &mut buf)?;
        self.write(&buf)?;
        if any_budget_rows(rows) && !self.allow_partial {
            return Err(HarnessError::Budget("some rows exceed an enumeration budget (use --allow-partial)".into()).into());
        }
        Ok(())
    }
}

fn read_symbols(path: &PathBuf) -> Result<Vec<u64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.split_whitespace()
        .map(|t| t.parse::<u64>().map_err(|_| HarnessError::Config(format!("bad symbol `{t}`")).into()))
        .collect()
}

fn render_symbols(x: &[u64]) -> String {
    let mut s = x.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    s.push('\n');
    s
}

fn encode(common: &Common, input: &PathBuf) -> Result<()> {
    let x = read_symbols(input)?;
    if x.is_empty() {
        return Err(HarnessError::Config("input holds no symbols".into()).into());
    }
    let cfg = dsfc_harness::config::codec_config_from(&common.kv()?, x.len() as u64)?;
    let codec = TwoStageCodec::new(cfg).map_err(HarnessError::from)?;
    let (stream, trace) = codec.encode_with_trace(&x).map_err(HarnessError::from)?;
    common.write(&stream.to_bytes())?;
    eprintln!(
        "n = {}, k = {}, payload = {} bits ({} first stage, {} second stage), rate = {:.6} bits/sample, rho_n = {}",
        x.len(),
        codec.k(),
        stream.payload_bits(),
        trace.first_bits,
        trace.second_bits,
        stream.payload_bits() as f64 / x.len() as f64,
        format_rational(&trace.rho)
    );
    Ok(())
}

fn decode(common: &Common, input: &PathBuf, reference: Option<&PathBuf>) -> Result<()> {
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let stream = EncodedStream::from_bytes(&bytes).map_err(HarnessError::from)?;
    let xhat = decode_self_contained(&stream).map_err(HarnessError::from)?;
    common.write(render_symbols(&xhat).as_bytes())?;
    if let Some(r) = reference {
        let x = read_symbols(r)?;
        let rho = stream.header.spec.rho_block(&x, &xhat).map_err(HarnessError::from)?;
        let d = stream.header.d;
        eprintln!("rho_n = {} ({:.6}), d = {}", format_rational(&rho), to_f64(&rho), format_rational(&d));
        if rho > d {
            return Err(HarnessError::Stream(format!("reconstruction exceeds d: {}", format_rational(&rho))).into());
        }
    }
    Ok(())
}

fn envelope_info(common: &Common) -> Result<Vec<ReportRow>> {
    let kv = common.kv()?;
    let env = envelope_from(&kv)?.ok_or_else(|| HarnessError::Config("missing --envelope".into()))?;
    let grid = parse_n_grid(kv.get("n_grid").unwrap_or("2^4..2^12"))?;
    let mut rows = vec![ReportRow::new(
        "envelope",
        "summable",
        if env.is_summable() { 1.0 } else { 0.0 },
        BoundType::Exact,
    )];
    if !env.is_summable() {
        return Ok(rows);
    }
    let c = |e: dsfc::Error| HarnessError::from(e);
    rows.push(ReportRow::new("envelope", "tau", env.tau().map_err(c)? as f64, BoundType::Exact));
    rows.push(ReportRow::new("envelope", "k0", env.lemma6_threshold().map_err(c)? as f64, BoundType::Exact));
    let mu = env.envelope_distribution().map_err(c)?;
    match entropy(&mu) {
        Ok(h) => rows.push(ReportRow::new("envelope", "entropy", h, BoundType::Estimate)),
        Err(_) => rows.push(ReportRow::new("envelope", "entropy", f64::INFINITY, BoundType::Exact)),
    }
    if let Some(r) = tail_ratio_reference(&env) {
        rows.push(ReportRow::new("envelope", "tail_ratio_reference", r, BoundType::Upper));
    }
    for n in grid {
        rows.push(ReportRow::new(format!("n={n}"), "u_f", env.u_f(n).map_err(c)? as f64, BoundType::Exact));
    }
    Ok(rows)
}

fn run(cli: &Cli) -> Result<()> {
    let common = &cli.common;
    match &cli.cmd {
        Command::Encode { input } => encode(common, input),
        Command::Decode { input, reference } => decode(common, input, reference.as_ref()),
        Command::Sweep => {
            let cfg = ExperimentConfig::from_kv(&common.kv()?)?;
            let result = run_sweep(&cfg)?;
            common.emit(&result.rows())
        }
        Command::Oracle { task } => {
            let mut kv = common.kv()?;
            if let Some(t) = task {
                kv.set("task", t.clone());
            }
            common.emit(&run_oracle(&kv)?)
        }
        Command::EnvelopeInfo => common.emit(&envelope_info(common)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<HarnessError>().map_or(2, HarnessError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
