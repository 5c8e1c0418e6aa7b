use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arraydesign_cli::config::RunConfig;
use arraydesign_cli::verify::{render, run_suites, VerifyInstance};
use arraydesign_cli::{cmd_bounds, cmd_design, cmd_mc, CliError, CliResult};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arraydesign", version, about = "Sensor-array design by mutual-information maximization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; changes speed only.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one design per configured SNR.
    Design(Common),
    /// Certificates for a design file.
    Bounds {
        #[command(flatten)]
        common: Common,
        design: PathBuf,
    },
    /// Monte-Carlo MSE of one or more design files.
    Mc {
        #[command(flatten)]
        common: Common,
        designs: Vec<PathBuf>,
    },
    /// Run the property suites on a small instance.
    Verify(Common),
}

impl Common {
    fn load(&self) -> CliResult<Option<RunConfig>> {
        let Some(path) = &self.config else { return Ok(None) };
        let mut cfg = RunConfig::load(path)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(Some(cfg))
    }

    fn require(&self) -> CliResult<RunConfig> {
        self.load()?.ok_or_else(|| CliError::Config("--config is required".into()))
    }

    fn out_dir(&self, cfg: &RunConfig) -> PathBuf {
        self.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."))
    }

    fn init_threads(&self) -> CliResult<()> {
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(CliError::Config("--threads must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
        }
        Ok(())
    }
}

fn report(path: &Path) {
    println!("wrote {}", path.display());
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Design(c) => {
            c.init_threads()?;
            let cfg = c.require()?;
            for p in cmd_design(&cfg, &c.out_dir(&cfg))? {
                report(&p);
            }
        }
        Command::Bounds { common: c, design } => {
            c.init_threads()?;
            let cfg = c.require()?;
            report(&cmd_bounds(&cfg, &design, &c.out_dir(&cfg))?);
        }
        Command::Mc { common: c, designs } => {
            c.init_threads()?;
            let cfg = c.require()?;
            report(&cmd_mc(&cfg, &designs, &c.out_dir(&cfg))?);
        }
        Command::Verify(c) => {
            c.init_threads()?;
            let mut inst = match c.load()? {
                Some(cfg) => VerifyInstance::from_config(&cfg),
                None => VerifyInstance::default(),
            };
            if let Some(seed) = c.seed {
                inst.seed = seed;
            }
            let reports = run_suites(&inst)?;
            print!("{}", render(&reports));
            let failed: Vec<_> = reports.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
            if !failed.is_empty() {
                return Err(CliError::Verification(failed.join(", ")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("arraydesign: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
