fn main() {
    std::process::exit(riesz_eq::cli::run(std::env::args_os()));
}
