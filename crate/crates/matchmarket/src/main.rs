fn main() {
    std::process::exit(matchmarket::cli::run_cli(std::env::args_os()));
}
