fn main() {
    std::process::exit(rwn_cli::run(std::env::args_os()));
}
