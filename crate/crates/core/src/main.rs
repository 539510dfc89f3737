use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    match bdtree::cli::run(std::env::args_os()) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe is not worth a panic
            let _ = stdout.write_all(out.stdout.as_bytes());
            let _ = stdout.flush();
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("bdtree: {}", e.message.trim_end());
            ExitCode::from(e.code as u8)
        }
    }
}
