fn main() {
    std::process::exit(c1mixed::cli::run(std::env::args_os()));
}
