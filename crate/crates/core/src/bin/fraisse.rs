fn main() {
    std::process::exit(fraisse::cli::run(std::env::args_os()));
}
