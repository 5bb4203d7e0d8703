use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    match cnret::cli::run(std::env::args_os()) {
        Ok(out) => {
            let _ = std::io::stdout().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
