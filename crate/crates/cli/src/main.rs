use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use abc_psvm_cli::commands::{cmd_fit, cmd_run, cmd_summarize, fit_config};
use abc_psvm_cli::CliError;

#[derive(Parser)]
#[command(name = "abc-psvm", version, about = "ABC with principal-SVM summary statistics")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit a summary map from a `theta,x_1..x_n` CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Config file with a `[psvm]` section.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Append summary columns to an `x_1..x_n` CSV.
    Summarize {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Run { config, seed } => {
            let summary = cmd_run(&config, seed)?;
            eprintln!(
                "{} finished in {:.1} s, output in {}",
                summary.manifest.experiment,
                summary.manifest.wall_clock_seconds,
                summary.output_dir.display()
            );
        }
        Command::Fit { input, output, config } => {
            let psvm = fit_config(config.as_deref())?;
            cmd_fit(&input, &output, &psvm)?;
        }
        Command::Summarize { map, input, output } => cmd_summarize(&map, &input, &output)?,
    }
    Ok(())
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
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
