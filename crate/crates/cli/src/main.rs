fn main() {
    std::process::exit(nfuq_cli::run(std::env::args_os()));
}
