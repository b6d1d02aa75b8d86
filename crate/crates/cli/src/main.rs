fn main() {
    std::process::exit(concsys_cli::run_cli(std::env::args_os()));
}
