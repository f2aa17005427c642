fn main() {
    std::process::exit(qpg::cli::main_with_args(std::env::args_os()));
}
