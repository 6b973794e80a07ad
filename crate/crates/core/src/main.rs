fn main() { std::process::exit(bmscale::cli::main()) }
