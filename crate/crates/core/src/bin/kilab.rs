fn main() {
    std::process::exit(kilab::cli::run(std::env::args_os()));
}
