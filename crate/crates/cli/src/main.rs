use std::process::ExitCode;

use clap::Parser;
use env_logger::Env;
use ibalm_cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(Env::new().filter_or("IBALM_LOG", "error")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let mut msg = err.to_string();
            for cause in err.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(&err))
        }
    }
}
