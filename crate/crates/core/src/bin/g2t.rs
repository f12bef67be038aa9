use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use g2t::bundled;
use g2t::commands::{run, Registry, RunOptions};
use g2t::model::parse_model;

/// Batch verifier for G2 model files.
#[derive(Parser, Debug)]
#[command(name = "g2t", version)]
struct Cli {
    /// Model file to run.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["example", "file"])]
    model: Option<PathBuf>,

    /// Model file given positionally.
    #[arg(value_name = "FILE", conflicts_with = "example")]
    file: Option<PathBuf>,

    /// Run a bundled model instead of a file.
    #[arg(long, value_parser = bundled::NAMES)]
    example: Option<String>,

    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,

    /// Only report tasks of this command.
    #[arg(long = "task", value_name = "COMMAND")]
    task: Option<String>,

    /// Show intermediate values such as kernel bases.
    #[arg(long, short)]
    verbose: bool,

    /// Print the model in canonical form and exit.
    #[arg(long)]
    print: bool,

    /// List the available task commands.
    #[arg(long)]
    list_commands: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let registry = Registry::standard();
    if cli.list_commands {
        for usage in registry.usages() {
            println!("{usage}");
        }
        return ExitCode::SUCCESS;
    }
    let path = cli.model.as_ref().or(cli.file.as_ref());
    let (source, text) = match (&cli.example, path) {
        (Some(name), _) => (name.clone(), bundled::by_name(name).expect("validated by clap").to_string()),
        (None, Some(path)) => match std::fs::read_to_string(path) {
            Ok(t) => (path.display().to_string(), t),
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        (None, None) => {
            eprintln!("error: no model given; use --model <PATH> or --example <NAME>");
            return ExitCode::from(2);
        }
    };
    let model = match parse_model(&text) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {source}: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.print {
        print!("{model}");
        return ExitCode::SUCCESS;
    }
    if let Some(name) = &cli.task {
        if registry.get(name).is_none() {
            eprintln!("error: unknown command '{name}'");
            return ExitCode::from(2);
        }
    }
    let options = RunOptions {
        task_filter: cli.task.clone(),
    };
    match run(&model, &registry, &options) {
        Ok(report) => {
            if cli.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.render(cli.verbose));
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {source}: {e}");
            ExitCode::from(2)
        }
    }
}
