use std::process::ExitCode;

fn main() -> ExitCode {
    fovexpm::cli::main_with_args(std::env::args_os())
}
