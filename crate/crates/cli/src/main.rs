use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = lamlab_cli::app::dispatch(std::env::args().skip(1), &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code)
}
