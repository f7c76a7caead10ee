use std::path::PathBuf;
use std::process::ExitCode;

use cflab_cli::config::{parse_config, parse_radii, ConfigError, ExperimentConfig};
use cflab_cli::{execute, Command};
use clap::Parser;
use serde_json::Value;

/// Build and certify (C,F)-schemes, and run experiments on the associated
/// action and its Poisson suspension.
#[derive(Parser, Debug)]
#[command(name = "cflab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Group: Z, Z^d, sum:o1,o2,..., heisenberg, or descriptor JSON.
    #[arg(long)]
    group: Option<String>,
    /// Scheme file.
    #[arg(long)]
    scheme: Option<PathBuf>,
    #[arg(long)]
    depth: Option<usize>,
    /// Radii as a,b,c or lo..hi or lo..=hi.
    #[arg(long)]
    radii: Option<String>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sampling resolution level.
    #[arg(long)]
    level: Option<usize>,
    #[arg(long)]
    l_max: Option<u64>,
    /// Constant Følner tolerance, e.g. 1/10.
    #[arg(long)]
    eps: Option<String>,
    /// Test element as JSON, e.g. [1] or [[1,1]]; repeatable.
    #[arg(long = "element")]
    elements: Vec<String>,
    /// Compact open set A as {"level": m, "names": [...]}.
    #[arg(long)]
    a: Option<String>,
    /// Compact open set B, defaulting to A.
    #[arg(long)]
    b: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn json_flag(name: &str, text: &str) -> Result<Value, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Json(format!("--{name}: {e}")))
}

fn config(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => ExperimentConfig::default(),
    };
    let elements = if cli.elements.is_empty() {
        None
    } else {
        Some(cli.elements.iter().map(|e| json_flag("element", e)).collect::<Result<_, _>>()?)
    };
    let flags = ExperimentConfig {
        group: cli.group.clone().map(Value::String),
        scheme: cli.scheme.as_ref().map(|p| Value::String(p.display().to_string())),
        depth: cli.depth,
        radii: cli.radii.as_deref().map(parse_radii).transpose()?,
        budget: cli.budget,
        trials: cli.trials,
        seed: cli.seed,
        level: cli.level,
        l_max: cli.l_max,
        eps: cli.eps.clone(),
        elements,
        a: cli.a.as_deref().map(|t| json_flag("a", t)).transpose()?,
        b: cli.b.as_deref().map(|t| json_flag("b", t)).transpose()?,
        out: cli.out.clone(),
    };
    let cfg = flags.or(file);
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match config(&cli) {
        Ok(cfg) => execute(cli.command, &cfg),
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    ExitCode::from(code as u8)
}
