use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypercol_core::experiments::{run, ExperimentConfig, ExperimentKind, OutputFormat};
use hypercol_core::moments::LandscapeSettings;
use hypercol_core::{Error, Result};

#[derive(Parser)]
#[command(name = "hypercol", version, about = "Random hypergraph colouring experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// λ_r, α_r, c_r, c_cond and (q^{k-1}-1) ln q over a (q, k) grid.
    Thresholds(Common),
    /// Loose-cycle census with a Poisson fit.
    Cycles(Common),
    /// Core fraction of planted instances.
    Core(Common),
    /// Recolouring certificates, cross-checked by the exact oracle on small n.
    Frozen(Common),
    /// Moment constants and an optional landscape scan.
    Moments(Common),
    /// Exact colouring counts against the exact first moment.
    Oracle(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_delimiter = ',', default_value = "3")]
    q: Vec<u16>,
    #[arg(long, value_delimiter = ',', default_value = "3")]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    c: Vec<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Exact edge count, replacing floor(c·n).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Trial t uses seed + t.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    workers: Option<usize>,
    /// JSON config; its keys override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Longest loose cycle counted.
    #[arg(long = "max-len", default_value_t = 3)]
    max_len: usize,
    /// Draw cycles from the planted model.
    #[arg(long)]
    planted: bool,
    #[arg(long = "depth-budget", default_value_t = 6)]
    depth_budget: usize,
    #[arg(long = "ell-max", default_value_t = 2)]
    ell_max: usize,
    /// Run a landscape scan with this many Sinkhorn samples.
    #[arg(long = "landscape-samples")]
    landscape_samples: Option<usize>,
    #[arg(long = "max-work")]
    max_work: Option<u64>,
}

impl Common {
    fn into_config(self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let defaults = ExperimentConfig::default();
        let cfg = ExperimentConfig {
            kind,
            q: self.q,
            k: self.k,
            c: self.c,
            n: self.n,
            m: self.m,
            trials: self.trials,
            base_seed: self.seed,
            max_len: self.max_len,
            out: self.out,
            format: match self.format {
                Format::Csv => OutputFormat::Csv,
                Format::Json => OutputFormat::Json,
            },
            workers: self.workers,
            planted: self.planted,
            depth_budget: self.depth_budget,
            ell_max: self.ell_max,
            landscape: self.landscape_samples.map(|samples| LandscapeSettings { samples, ..Default::default() }),
            max_work: self.max_work.unwrap_or(defaults.max_work),
            ..defaults
        };
        match self.config {
            None => Ok(cfg),
            Some(path) => merge_config(cfg, &std::fs::read_to_string(path)?),
        }
    }
}

/// Overlays the keys of a JSON object on `base`.
fn merge_config(base: ExperimentConfig, text: &str) -> Result<ExperimentConfig> {
    let overlay: serde_json::Value = serde_json::from_str(text)?;
    let serde_json::Value::Object(overlay) = overlay else {
        return Err(Error::InvalidParams("config file must hold a JSON object".into()));
    };
    let mut merged = serde_json::to_value(&base)?;
    let obj = merged.as_object_mut().expect("config serialises to an object");
    for (key, value) in overlay {
        obj.insert(key, value);
    }
    Ok(serde_json::from_value(merged)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::Thresholds(c) => (ExperimentKind::Thresholds, c),
        Command::Cycles(c) => (ExperimentKind::Cycles, c),
        Command::Core(c) => (ExperimentKind::Core, c),
        Command::Frozen(c) => (ExperimentKind::Frozen, c),
        Command::Moments(c) => (ExperimentKind::Moments, c),
        Command::Oracle(c) => (ExperimentKind::Oracle, c),
    };
    let result = common.into_config(kind).and_then(|cfg| run(&cfg)?.write());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hypercol: {e}");
            // JSON errors in a config file are usage errors
            let code = match e {
                Error::Json(_) => 2,
                ref other => other.exit_code(),
            };
            ExitCode::from(code as u8)
        }
    }
}
