fn main() {
    std::process::exit(zigev_cli::run(std::env::args_os()));
}
