use clap::Parser;

fn main() {
    std::process::exit(pika_cli::run(pika_cli::Cli::parse()));
}
