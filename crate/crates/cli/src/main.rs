fn main() {
    std::process::exit(navier4_cli::run(std::env::args_os()));
}
