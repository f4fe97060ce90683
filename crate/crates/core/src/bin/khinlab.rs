fn main() {
    std::process::exit(khinlab::cli::run(std::env::args_os()));
}
