fn main() {
    rarita::cli::init_logging();
    std::process::exit(rarita::cli::run(std::env::args_os()));
}
