fn main() {
    std::process::exit(envyorder_cli::main_with_args(std::env::args_os()));
}
