use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use kmboot_cli::app::{command_name, destination, error_document, execute};
use kmboot_cli::Cli;
use kmboot_core::parallel::{threads_from_env, with_threads};

fn write_out(path: Option<&std::path::Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    let (output, format) = destination(&cli.command);

    let outcome = with_threads(threads_from_env(), || execute(&cli.command));
    match outcome {
        Ok(artifact) => {
            for w in &artifact.envelope.warnings {
                log::warn!("{w}");
            }
            if let Err(e) = write_out(output.as_deref(), &artifact.render(format)) {
                eprintln!(
                    "{}",
                    error_document(name, &kmboot_cli::CliError::Io(e.to_string()))
                );
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            let doc = error_document(name, &err);
            if write_out(output.as_deref(), &doc).is_err() || output.is_some() {
                eprint!("{doc}");
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
