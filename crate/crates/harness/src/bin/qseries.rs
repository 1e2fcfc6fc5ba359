use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(qseries_harness::cli::run(std::env::args_os()))
}
