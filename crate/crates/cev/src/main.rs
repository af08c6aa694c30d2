fn main() {
    std::process::exit(cev::cli::run(std::env::args_os()));
}
