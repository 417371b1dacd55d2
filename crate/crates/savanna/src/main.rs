use clap::Parser;

fn main() {
    let cli = savanna::cli::Cli::parse();
    std::process::exit(savanna::cli::dispatch(cli));
}
