fn main() { std::process::exit(subpoisson::cli::main_exit()) }
