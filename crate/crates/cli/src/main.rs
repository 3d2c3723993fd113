use clap::Parser;
use tskit_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("tskit: {e}");
        std::process::exit(e.exit_code());
    }
}
