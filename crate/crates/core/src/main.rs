fn main() {
    std::process::exit(betlab::cli::run(std::env::args_os()));
}
