use std::process::ExitCode;

fn main() -> ExitCode {
    symtomo_cli::run(std::env::args_os())
}
