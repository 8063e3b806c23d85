fn main() {
    std::process::exit(hce_cli::run(std::env::args_os().collect()));
}
