fn main() {
    std::process::exit(devian::cli::run(std::env::args_os()));
}
