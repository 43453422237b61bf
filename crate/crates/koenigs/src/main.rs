use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use koenigs::cli::{run, Cli};
use koenigs::params::precision_from_env;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    let result = precision_from_env().and_then(|p| run(cli, p, &mut out, &mut err));
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
