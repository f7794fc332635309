fn main() { std::process::exit(varind::cli::main()) }
