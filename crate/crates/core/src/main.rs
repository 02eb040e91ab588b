fn main() {
    std::process::exit(weylbc::cli::run(std::env::args_os()));
}
