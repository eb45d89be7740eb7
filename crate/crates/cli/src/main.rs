fn main() {
    std::process::exit(heol_cli::main_with(std::env::args_os()));
}
