use clap::Parser;

fn main() {
    let cli = nilspec::run::Cli::parse();
    if let Err(e) = nilspec::run::execute(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
