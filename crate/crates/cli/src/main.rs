use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use wshift::certify::cover_orbit;
use wshift::verdict::{analyze, paper_example_options, CertificateRequest};
use wshift::weights::bundled_rule;
use wshift::{AnalysisOptionsF64, AnalysisReportF64, Error, WeightRuleF64, WeightSequenceF64};

const COVER_SCHEMA: &str = "wshift-cover/1";

#[derive(Parser)]
#[command(name = "wshift", version, about = "Spectral analysis of bilateral weighted shifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral profile, rule verdicts and optional certificates for a weight rule.
    Analyze {
        config: PathBuf,
        #[arg(long, default_value_t = 1 << 12)]
        horizon_n: usize,
        #[arg(long, default_value_t = 1 << 12)]
        horizon_k: usize,
        /// `k=0,eps=1e-3[,c=1.5]`; may be repeated.
        #[arg(long, value_parser = parse_certify)]
        certify: Vec<CertificateRequest<f64>>,
        /// Scan the inverse orbit of e_0 for a separated witness.
        #[arg(long)]
        witness: bool,
        #[arg(long, default_value_t = wshift::verdict::DEFAULT_WITNESS_HORIZON)]
        witness_horizon: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for per-quantity `n,value` tables.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Bundled demonstrations.
    Demo {
        #[arg(value_parser = ["paper-example"])]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy ε-net of sampled points p(W)e_k.
    Cover {
        config: PathBuf,
        #[arg(long)]
        k: i64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        max_degree: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_certify(s: &str) -> Result<CertificateRequest<f64>, String> {
    let (mut k, mut eps, mut c) = (None, None, None);
    for part in s.split(',') {
        let (key, value) = part.split_once('=').ok_or_else(|| format!("expected key=value, got {part:?}"))?;
        let bad = |e: &dyn std::fmt::Display| format!("{key}: {e}");
        match key.trim() {
            "k" => k = Some(value.trim().parse::<i64>().map_err(|e| bad(&e))?),
            "eps" => eps = Some(value.trim().parse::<f64>().map_err(|e| bad(&e))?),
            "c" => c = Some(value.trim().parse::<f64>().map_err(|e| bad(&e))?),
            other => return Err(format!("unknown key {other:?}")),
        }
    }
    Ok(CertificateRequest {
        basis_index: k.ok_or("missing k")?,
        epsilon: eps.ok_or("missing eps")?,
        c,
    })
}

/// A weight rule object, or the name of a bundled rule as a JSON string.
fn load_rule(path: &Path) -> Result<WeightRuleF64, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if let Some(name) = value.as_str() {
        return bundled_rule(name).ok_or_else(|| Error::Config(format!("unknown bundled rule {name:?}")));
    }
    serde_json::from_value(value).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn emit(value: &impl serde::Serialize, out: Option<&Path>) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_csv(report: &AnalysisReportF64, dir: &Path) -> Result<(), Error> {
    let io = |e: &dyn std::fmt::Display| Error::Config(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(|e| io(&e))?;
    for q in report.profile.quantities() {
        let mut w = csv::Writer::from_path(dir.join(format!("{}.csv", q.name.name()))).map_err(|e| io(&e))?;
        w.write_record(["n", "value"]).map_err(|e| io(&e))?;
        for (n, v) in q.rows() {
            w.write_record([n.to_string(), v.to_string()]).map_err(|e| io(&e))?;
        }
        w.flush().map_err(|e| io(&e))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Analyze { config, horizon_n, horizon_k, certify, witness, witness_horizon, out, csv } => {
            let rule = load_rule(&config)?;
            let options = AnalysisOptionsF64 { horizon_n, horizon_k, certificates: certify, witness, witness_horizon };
            let report = analyze(rule, &options)?;
            if let Some(dir) = csv {
                write_csv(&report, &dir)?;
            }
            emit(&report, out.as_deref())
        }
        Command::Demo { out, .. } => {
            let rule: WeightRuleF64 = bundled_rule("paper-example").expect("bundled");
            let report = analyze(rule, &paper_example_options())?;
            emit(&report, out.as_deref())
        }
        Command::Cover { config, k, eps, samples, max_degree, seed, out } => {
            let rule = load_rule(&config)?;
            let w = WeightSequenceF64::new(rule.clone())?;
            let report = cover_orbit(&w, k, eps, samples, max_degree, seed)?;
            let doc = json!({
                "schema": COVER_SCHEMA,
                "tool_version": env!("CARGO_PKG_VERSION"),
                "rule": rule,
                "basis_index": k,
                "max_degree": max_degree,
                "normalization": "op_norm_upper_bound",
                "covering": report,
            });
            emit(&doc, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
