use clap::Parser;

fn main() {
    std::process::exit(stochnav::cli::run(stochnav::cli::Cli::parse()));
}
