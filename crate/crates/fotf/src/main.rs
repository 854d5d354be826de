use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use fotf::cli::{run, Cli};
use fotf::{io, CliError};

fn main() -> ExitCode {
    let err = match Cli::try_parse() {
        Ok(cli) => match run(cli, &mut std::io::stdout().lock()) {
            Ok(()) => return ExitCode::SUCCESS,
            Err(e) => e,
        },
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => CliError::Parse(e.render().to_string().trim_end().to_string()),
    };
    eprint!("{}", io::to_line(&err.to_json()));
    ExitCode::from(err.exit_code() as u8)
}
