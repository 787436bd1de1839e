use clap::Parser;

fn main() {
    let cli = rfiqkd::cli::Cli::parse();
    std::process::exit(rfiqkd::cli::run(&cli));
}
