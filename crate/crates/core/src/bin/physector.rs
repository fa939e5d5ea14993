fn main() {
    std::process::exit(physector::cli::run(std::env::args_os()));
}
