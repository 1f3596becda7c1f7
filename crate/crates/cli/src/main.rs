use clap::Parser;

fn main() {
    std::process::exit(dualgain_cli::run(dualgain_cli::Cli::parse()));
}
