fn main() {
    std::process::exit(gkz_core::cli::run(std::env::args_os()));
}
