use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(splinemat_cli::commands::main_with_args(std::env::args_os()))
}
