fn main() {
    std::process::exit(punctlab::cli::run(std::env::args_os()));
}
