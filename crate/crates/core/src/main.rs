fn main() {
    std::process::exit(edho::cli::run_from(std::env::args_os()));
}
