fn main() {
    std::process::exit(randfid::cli::run(std::env::args_os()));
}
