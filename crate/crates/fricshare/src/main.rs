fn main() {
    std::process::exit(fricshare::cli::run(std::env::args_os()));
}
