fn main() {
    std::process::exit(lodense_cli::run(std::env::args_os()));
}
