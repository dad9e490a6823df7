use clap::Parser;

fn main() {
    let cli = topotext_cli::Cli::parse();
    if let Err(e) = topotext_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
