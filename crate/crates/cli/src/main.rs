use clap::Parser;
use qcr_cli::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = qcr_cli::run(&cli) {
        eprintln!("qcr: {e}");
        std::process::exit(e.exit_code());
    }
}
