fn main() {
    std::process::exit(specgap::cli::run(std::env::args_os()));
}
