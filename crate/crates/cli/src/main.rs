fn main() {
    std::process::exit(cqreg_cli::run(std::env::args_os()));
}
