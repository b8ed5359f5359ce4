fn main() {
    std::process::exit(pathwise::cli::main_with_args(std::env::args_os()));
}
