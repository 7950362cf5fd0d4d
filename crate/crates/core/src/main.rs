fn main() {
    std::process::exit(funcwave::cli::run_cli(std::env::args_os()));
}
