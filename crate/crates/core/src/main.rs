use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = gauss_cubature::cli::main_with_args(std::env::args_os());
    let ok = outcome.code == gauss_cubature::cli::EXIT_OK
        || outcome.code == gauss_cubature::cli::EXIT_NO_CUBATURE;
    let _ = if ok {
        std::io::stdout().write_all(outcome.report.as_bytes())
    } else {
        std::io::stderr().write_all(outcome.report.as_bytes())
    };
    ExitCode::from(outcome.code as u8)
}
