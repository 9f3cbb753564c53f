fn main() { std::process::exit(ladder_cli::run(std::env::args().collect())) }
