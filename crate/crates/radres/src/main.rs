fn main() {
    std::process::exit(radres::cli::run(std::env::args_os()));
}
