use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(pivotlab::cli::run(std::env::args_os()))
}
