fn main() {
    std::process::exit(comblab::cli::run(std::env::args_os()));
}
