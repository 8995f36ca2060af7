fn main() {
    std::process::exit(olex::cli::main_with_args(std::env::args_os()));
}
