use std::process::ExitCode;

fn main() -> ExitCode {
    let code = partlab_cli::run_with_io(std::env::args());
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}
