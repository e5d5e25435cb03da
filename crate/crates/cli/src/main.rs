fn main() {
    std::process::exit(bochner_cli::run(std::env::args_os()));
}
