use clap::Parser;

fn main() {
    let cli = telegraph::cli::Cli::parse();
    std::process::exit(telegraph::cli::run(cli));
}
