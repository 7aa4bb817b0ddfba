fn main() {
    std::process::exit(speclift::cli::run(std::env::args_os()));
}
