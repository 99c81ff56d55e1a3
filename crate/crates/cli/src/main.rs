fn main() {
    std::process::exit(zakharov_cli::run(std::env::args_os()));
}
