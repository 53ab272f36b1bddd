fn main() {
    std::process::exit(wfanova::cli::run(std::env::args_os()));
}
