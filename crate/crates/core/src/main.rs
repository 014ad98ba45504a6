fn main() {
    std::process::exit(lipgerm::cli::main_with_args(std::env::args_os()));
}
