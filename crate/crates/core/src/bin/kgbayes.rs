fn main() {
    std::process::exit(kgbayes::cli::run(std::env::args_os()));
}
