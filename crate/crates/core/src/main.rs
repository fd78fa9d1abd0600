fn main() {
    std::process::exit(cvswap::cli::run(std::env::args_os()));
}
