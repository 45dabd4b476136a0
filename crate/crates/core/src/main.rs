use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(iclap::cli::run(std::env::args_os()))
}
