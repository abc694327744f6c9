fn main() {
    std::process::exit(scafrest_cli::run(std::env::args_os()));
}
