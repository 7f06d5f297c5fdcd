use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use circgeo::config::parse_vec3;
use circgeo::{
    cmd_eval, cmd_scan, cmd_verify, CliError, EvalTarget, Format, GradModeSpec, GridSpec, RunConfig, StencilSpec,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "circgeo", version, about = "Connection and curvature checks for the metric circ(A, B, B)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one quantity at each point.
    Eval {
        #[arg(value_enum)]
        what: EvalTarget,
        #[command(flatten)]
        opts: RunArgs,
    },
    /// Run the full check suite; exit 1 if any check fails.
    Verify {
        #[command(flatten)]
        opts: RunArgs,
    },
    /// Tabulate A, B, D, definiteness and an orbit sectional curvature over a grid.
    Scan {
        #[command(flatten)]
        opts: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// `A: <poly>; B: <poly>`, a built-in name, or `@file`.
    #[arg(long)]
    fields: Option<String>,
    /// JSON run configuration; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Evaluation point `x1,x2,x3` (repeatable).
    #[arg(long = "point", allow_hyphen_values = true)]
    points: Vec<String>,
    /// `min,max,steps` for all axes or nine values for separate axes.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, value_enum)]
    grad: Option<GradModeSpec>,
    /// Base step for finite-difference gradients.
    #[arg(long)]
    grad_step: Option<f64>,
    /// Base step for curvature finite differences.
    #[arg(long)]
    step: Option<f64>,
    /// Central-difference stencil for curvature.
    #[arg(long, value_enum)]
    stencil: Option<StencilSpec>,
    #[arg(long)]
    seed: Option<u64>,
    /// Orbit seed vector `x1,x2,x3` (repeatable).
    #[arg(long = "vector", allow_hyphen_values = true)]
    vectors: Vec<String>,
    /// Random samples per point.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Tolerance override `KEY=VAL` (repeatable).
    #[arg(long = "tol")]
    tols: Vec<String>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::new(String::new()),
        };
        if let Some(fields) = self.fields {
            config.fields = match fields.strip_prefix('@') {
                Some(path) => fs::read_to_string(path)?.trim().to_string(),
                None => fields,
            };
        }
        if config.fields.trim().is_empty() {
            return Err(CliError::Config("no fields given; use --fields or --config".into()));
        }
        for p in &self.points {
            config.points.push(parse_vec3(p)?);
        }
        if let Some(grid) = &self.grid {
            config.grid = Some(GridSpec::parse(grid)?);
        }
        for v in &self.vectors {
            config.vectors.push(parse_vec3(v)?);
        }
        if let Some(g) = self.grad {
            config.grad_mode = g;
        }
        if let Some(h) = self.grad_step {
            config.grad_step = h;
        }
        if let Some(h) = self.step {
            config.fd_step = h;
        }
        if let Some(s) = self.stencil {
            config.stencil = s;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(n) = self.samples {
            config.samples = n;
        }
        if let Some(out) = self.out {
            config.output = Some(out);
        }
        if let Some(f) = self.format {
            config.format = f;
        }
        for t in &self.tols {
            config.tolerances.parse_assignment(t)?;
        }
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let report = match cli.command {
        Command::Eval { what, opts } => cmd_eval(&opts.into_config()?, what)?,
        Command::Verify { opts } => cmd_verify(&opts.into_config()?)?,
        Command::Scan { opts } => cmd_scan(&opts.into_config()?)?,
    };
    let mut buf = Vec::new();
    match report.config.format {
        Format::Json => report.write_json(&mut buf)?,
        Format::Csv => report.write_csv(&mut buf)?,
    }
    match &report.config.output {
        Some(path) => fs::write(path, &buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    let s = report.summary;
    eprintln!("{} pass, {} fail, {} skipped", s.pass_count, s.fail_count, s.skipped_count);
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
