use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use scatter_cli::commands::load_config;
use scatter_cli::{run, CliError, Subcommand};

/// Point scatterers on flat tori: spectra, sieves and equidistribution.
#[derive(Parser, Debug)]
#[command(name = "scatter", version)]
struct Args {
    /// One of norms, spectrum, sieve, equidist, verify, report. Any
    /// `--section.key value` pair overrides the matching config entry.
    subcommand: String,
    /// Flat `section.key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Spectrum ceiling for `spectrum`, range ceiling otherwise.
    #[arg(long)]
    lambda_max: Option<f64>,
    /// minus-identity, rank1-sample or rank2-sample.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
}

/// Splits dotted `--section.key[=value]` overrides from the flags clap knows.
fn split_overrides(argv: impl Iterator<Item = String>) -> (Vec<String>, Vec<String>) {
    let (mut plain, mut dotted) = (Vec::new(), Vec::new());
    let mut argv = argv;
    while let Some(a) = argv.next() {
        let name = a.strip_prefix("--").map(|b| b.split('=').next().unwrap_or(b));
        if name.is_some_and(|n| n.contains('.')) {
            let has_value = a.contains('=');
            dotted.push(a);
            if !has_value {
                dotted.extend(argv.next());
            }
        } else {
            plain.push(a);
        }
    }
    (plain, dotted)
}

fn execute(args: Args, dotted: Vec<String>) -> Result<Vec<String>, CliError> {
    let cmd: Subcommand = args.subcommand.parse()?;
    let mut overrides = Vec::new();
    let mut put = |k: &str, v: String| overrides.push(format!("--{k}={v}"));
    if let Some(p) = &args.out {
        put("output.dir", p.display().to_string());
    }
    if let Some(p) = &args.cache {
        put("cache.dir", p.display().to_string());
    }
    if let Some(l) = args.lambda_max {
        let key = if cmd == Subcommand::Spectrum { "spectrum.lambda_max" } else { "range.lambda_max" };
        put(key, l.to_string());
    }
    if let Some(p) = args.preset {
        put("extension.preset", p);
    }
    if let Some(n) = args.threads {
        put("run.threads", n.to_string());
    }
    // explicit dotted overrides win over the shorthand flags
    overrides.extend(dotted);
    let cfg = load_config(args.config.as_deref(), &overrides)?;
    run(cmd, &cfg)
}

fn main() -> ExitCode {
    let (plain, dotted) = split_overrides(std::env::args());
    match execute(Args::parse_from(plain), dotted) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
