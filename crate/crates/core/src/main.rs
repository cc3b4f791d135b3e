use std::process::ExitCode;

fn main() -> ExitCode {
    sparse_vda::cli::run(std::env::args_os())
}
