use clap::Parser;

fn main() {
    std::process::exit(sre_core::cli::run(sre_core::cli::Cli::parse()));
}
