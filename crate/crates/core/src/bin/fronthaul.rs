fn main() {
    std::process::exit(fronthaul::cli::main_with_args(std::env::args_os()));
}
