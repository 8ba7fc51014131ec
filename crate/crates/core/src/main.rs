fn main() {
    std::process::exit(cqsp::cli::main_with_args(std::env::args_os()));
}
