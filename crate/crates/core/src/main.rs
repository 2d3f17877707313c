fn main() {
    std::process::exit(vcmod::cli::main_with_args(std::env::args_os()));
}
