fn main() {
    std::process::exit(ucrc::cli::main_with(std::env::args_os()));
}
