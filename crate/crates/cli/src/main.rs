fn main() {
    std::process::exit(innosearch_cli::run(std::env::args_os()));
}
