fn main() {
    std::process::exit(stochq::cli::run(std::env::args_os()));
}
