fn main() { std::process::exit(polyflow::cli::run(std::env::args_os())); }
