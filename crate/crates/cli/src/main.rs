use std::process::ExitCode;

fn main() -> ExitCode {
    match pskfade_cli::run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pskfade: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
