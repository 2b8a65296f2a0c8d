fn main() {
    std::process::exit(scatmask::cli::run(std::env::args_os()));
}
