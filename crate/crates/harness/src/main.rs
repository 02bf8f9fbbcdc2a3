use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mvbbo_harness::table::read_stats;
use mvbbo_harness::{emit_plot, run_and_write, suite, ExperimentConfig, HarnessError, PlotStyle};

#[derive(Parser)]
#[command(name = "mvbbo", about = "Run mixed-variable optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scale {
    Log,
    Linear,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full experiment grid.
    Suite {
        #[arg(long)]
        out: PathBuf,
    },
    /// Plot a stats CSV as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "log")]
        scale: Scale,
        #[arg(long, default_value = "")]
        title: String,
        #[arg(long, default_value = "best fitness")]
        y_label: String,
        #[arg(long, default_value = "median")]
        legend: String,
    },
}

fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run {
            config,
            seed,
            trials,
            out,
        } => {
            let mut c = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                c.seed = s;
            }
            if let Some(t) = trials {
                c.trials = t;
            }
            if let Some(o) = out {
                c.out = Some(o);
            }
            c.validate()?;
            let dir = run_and_write(&c, None)?;
            println!("wrote {}", dir.display());
        }
        Command::Suite { out } => {
            suite::run_suite(&out, |name| eprintln!("running {name}"))?;
            println!("wrote {}", out.display());
        }
        Command::Plot {
            input,
            out,
            scale,
            title,
            y_label,
            legend,
        } => {
            let stats = read_stats(&input)?;
            if stats.is_empty() {
                return Err(HarnessError::Config(format!(
                    "{}: no data rows",
                    input.display()
                )));
            }
            let style = PlotStyle {
                title,
                x_label: "evaluations".into(),
                y_label,
                legend,
                log_y: matches!(scale, Scale::Log),
            };
            emit_plot(&stats, &out, &style)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
