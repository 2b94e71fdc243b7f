fn main() {
    std::process::exit(asai_gamma::cli::main_with(std::env::args_os()));
}
