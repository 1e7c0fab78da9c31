use std::process::ExitCode;

fn main() -> ExitCode {
    expectrl::harness::cli::main_with(std::env::args_os())
}
