use clap::Parser;
use gpt_cloak_cli::{run, Cli, EXIT_ERROR};

fn main() {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(outcome) => {
            for line in &outcome.stdout {
                println!("{line}");
            }
            std::process::exit(outcome.code);
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(EXIT_ERROR);
        }
    }
}
