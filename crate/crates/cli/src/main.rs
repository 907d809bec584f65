use std::process::ExitCode;

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("ROY_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                roybounds::par::configure_threads(n);
            }
            _ => {
                eprintln!("roy: ROY_THREADS={v:?} is not a positive integer");
                return ExitCode::from(1);
            }
        }
    }
    ExitCode::from(roybounds_cli::run(std::env::args_os()) as u8)
}
