use clap::Parser;

fn main() {
    let cli = unipoly_cli::Cli::parse();
    std::process::exit(unipoly_cli::run(&cli));
}
