use clap::Parser;

fn main() {
    std::process::exit(crharq::cli::run(crharq::cli::Cli::parse()));
}
