use std::path::PathBuf;
use std::process::ExitCode;

use austere_cli::{run, CliError, Command, RunConfig, EXIT_ASSERTION, EXIT_PASS};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "austere",
    version,
    about = "Build, verify and classify austere submanifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Export sample points of a family as CSV
    Family(Common),
    /// Check austerity, minimality, normal rank and rulings
    Verify(Common),
    /// Fit |II| into the Type A/B/C models
    Classify(Common),
    /// Check the conormal bundle is (special) Lagrangian
    Slag(Common),
    /// Check the ruling map into the quadric is holomorphic
    Holomorphy(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Structured,
}

#[derive(Args)]
struct Common {
    /// key = value config file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    /// Family parameter, e.g. --param m=4 (repeatable)
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid points per axis, e.g. 10,10 (one value applies to every axis)
    #[arg(long)]
    grid: Option<String>,
    /// Number of uniform random points
    #[arg(long)]
    random: Option<usize>,
    #[arg(long)]
    tol_austere: Option<f64>,
    #[arg(long)]
    tol_ruling: Option<f64>,
    #[arg(long)]
    classify_threshold: Option<f64>,
    /// Fail unless every point is austere
    #[arg(long)]
    assert_austere: bool,
    /// Verify a K-dimensional ruling at every point
    #[arg(long, value_name = "K")]
    check_ruling: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

impl Common {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::config("--config", format!("{}: {e}", path.display()))
                })?;
                RunConfig::parse(&text)?
            }
            None => RunConfig::default(),
        };
        let mut set = |k: &str, v: String| cfg.set(k, &v);
        if let Some(f) = &self.family {
            set("family", f.clone())?;
        }
        for p in &self.params {
            let (k, v) = p.split_once('=').ok_or_else(|| {
                CliError::config("--param", format!("expected KEY=VALUE, got `{p}`"))
            })?;
            set(&format!("params.{}", k.trim()), v.trim().to_string())?;
        }
        let flags = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("samples.grid", self.grid.clone()),
            ("samples.random", self.random.map(|v| v.to_string())),
            ("tol.austere", self.tol_austere.map(|v| v.to_string())),
            ("tol.ruling", self.tol_ruling.map(|v| v.to_string())),
            (
                "tol.classify",
                self.classify_threshold.map(|v| v.to_string()),
            ),
            ("check.ruling", self.check_ruling.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            (
                "format",
                self.format.map(|f| match f {
                    FormatArg::Text => "text".to_string(),
                    FormatArg::Structured => "structured".to_string(),
                }),
            ),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                set(k, v)?;
            }
        }
        if self.assert_austere {
            set("assert.austere", "true".into())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(command: Command, args: &Common) -> Result<i32, CliError> {
    let cfg = args.config()?;
    let outcome = run(command, &cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.output)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => print!("{}", outcome.output),
    }
    for line in &outcome.failures {
        eprintln!("assertion failed: {line}");
    }
    Ok(if outcome.passed {
        EXIT_PASS
    } else {
        EXIT_ASSERTION
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Sub::Family(a) => (Command::Family, a),
        Sub::Verify(a) => (Command::Verify, a),
        Sub::Classify(a) => (Command::Classify, a),
        Sub::Slag(a) => (Command::Slag, a),
        Sub::Holomorphy(a) => (Command::Holomorphy, a),
    };
    let code = execute(command, args).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
