use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use attsync::config::parse_config;
use attsync::pipeline::{self, output_dir, RunError};

#[derive(Parser)]
#[command(name = "attsync", version, about = "Attitude synchronization experiments over directed graphs")]
struct Cli {
    /// Output directory (overrides the config's `path`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write SVG charts.
    #[arg(long, global = true)]
    svg: bool,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a config and write trace, metrics and summary files.
    Run { config: PathBuf },
    /// Report connectivity and the initial-condition class without simulating.
    Check { config: PathBuf },
    /// Run the bundled cases and the negative control, printing pass/fail lines.
    Goldens,
}

fn load(path: &Path) -> Result<attsync::config::SimConfig, RunError> {
    let text = fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_config(&text)?)
}

fn fail(e: &RunError) -> ExitCode {
    let msg = e.to_string().replace('\n', " ");
    eprintln!("error[{}]: {msg}", e.kind());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match &cli.command {
        Command::Run { config } => {
            let result = load(config).and_then(|cfg| {
                let dir = output_dir(&cfg, cli.out.as_deref());
                pipeline::run(&cfg, &dir, cli.svg)
            });
            match result {
                Ok(o) => {
                    if !cli.quiet {
                        print!("{}", o.summary);
                        for f in &o.files {
                            println!("wrote {}", f.display());
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Check { config } => match load(config).and_then(|cfg| pipeline::check(&cfg)) {
            Ok(report) => {
                if !cli.quiet {
                    print!("{report}");
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Goldens => {
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(pipeline::DEFAULT_OUT_DIR));
            match pipeline::goldens(&dir, cli.svg) {
                Ok(checks) => {
                    let ok = checks.iter().all(|c| c.passed);
                    for c in checks.iter().filter(|c| !cli.quiet || !c.passed) {
                        println!("{c}");
                    }
                    if ok {
                        ExitCode::SUCCESS
                    } else {
                        eprintln!("error[acceptance]: {} golden check(s) failed", checks.iter().filter(|c| !c.passed).count());
                        ExitCode::from(3)
                    }
                }
                Err(e) => fail(&e),
            }
        }
    }
}
