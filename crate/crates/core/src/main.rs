fn main() {
    std::process::exit(unitlinked::cli::main_with_args(std::env::args_os()));
}
