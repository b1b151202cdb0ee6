use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(meltpool_rom::cli::main_with_args(std::env::args_os()))
}
