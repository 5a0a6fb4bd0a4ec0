fn main() {
    std::process::exit(shortage_cli::main_with_args(std::env::args_os()));
}
