mod cli;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

fn fail(message: &str, code: u8) -> ExitCode {
    let line = message.trim().replace('\n', "; ");
    eprintln!("zbias: error: {line}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let args = match cli::Cli::try_parse() {
        Ok(args) => args,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            return fail("a subcommand is required; see `zbias --help`", 1);
        }
        Err(e) => {
            // Keep the first paragraph; drop usage and tips.
            let rendered = e.to_string();
            let summary: Vec<&str> = rendered
                .lines()
                .map(str::trim)
                .take_while(|l| !l.is_empty())
                .collect();
            return fail(summary.join(" ").trim_start_matches("error: "), 1);
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run::run(&args.command, &mut out).and_then(|()| {
        out.flush()
            .map_err(|e| run::CliError::Io(format!("cannot write output: {e}")))
    }) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e.to_string(), e.exit_code()),
    }
}
