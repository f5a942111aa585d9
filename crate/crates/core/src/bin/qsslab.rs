use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qsslab::harness::{run, Command, Config, DEFAULT_CONFIG};
use qsslab::Error;

#[derive(Parser)]
#[command(name = "qsslab", version, about = "Quasi-self-similar mixing experiments")]
struct Cli {
    /// Key/value config file; unset keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; each subcommand writes to its own subdirectory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    GeometryCheck,
    BuildFamily,
    Scaling {
        #[arg(long)]
        n_max: Option<u32>,
    },
    Dissipate,
    StabilitySweep,
    Embed,
    Report,
}

fn load(cli: &Cli) -> Result<Config, Error> {
    let mut config = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("config: cannot read {}: {e}", p.display())))?;
            Config::parse(&text)?
        }
        None => Config::defaults(),
    };
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(Sub::Scaling { n_max: Some(n) }) = cli.command {
        config.n_max = n;
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if cli.print_config {
        if cli.config.is_none() && cli.seed.is_none() {
            print!("{DEFAULT_CONFIG}");
        } else {
            print!("{}", config.render());
        }
        return ExitCode::SUCCESS;
    }
    let Some(sub) = cli.command else {
        eprintln!("error: no subcommand given; see --help");
        return ExitCode::from(2);
    };
    let cmd = match sub {
        Sub::GeometryCheck => Command::GeometryCheck,
        Sub::BuildFamily => Command::BuildFamily,
        Sub::Scaling { .. } => Command::Scaling,
        Sub::Dissipate => Command::Dissipate,
        Sub::StabilitySweep => Command::StabilitySweep,
        Sub::Embed => Command::Embed,
        Sub::Report => Command::Report,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: threads: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cmd, &config, &cli.out)) {
        Ok(outcome) => {
            for c in &outcome.contracts {
                println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            for c in outcome.failures() {
                eprintln!("contract failed: {}", c.name);
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
