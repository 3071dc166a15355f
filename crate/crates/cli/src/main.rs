fn main() {
    std::process::exit(wigner_cli::app::main_with(std::env::args_os()));
}
