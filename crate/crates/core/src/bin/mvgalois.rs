use std::io::Write;
use std::process::ExitCode;

use mvgalois::cli;

fn main() -> ExitCode {
    cli::configure_workers();
    let (format, outcome) = cli::run_with(std::env::args_os());
    let rendered = outcome.render(format);
    if outcome.code == cli::EXIT_INPUT {
        let _ = std::io::stderr().write_all(rendered.as_bytes());
    } else {
        let _ = std::io::stdout().write_all(rendered.as_bytes());
    }
    ExitCode::from(outcome.code as u8)
}
