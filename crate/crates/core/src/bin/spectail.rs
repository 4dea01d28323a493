fn main() {
    std::process::exit(spectail::app::cli::main_with_args(std::env::args_os()));
}
