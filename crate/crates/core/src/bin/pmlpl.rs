fn main() {
    std::process::exit(pmlpl::cli::run(std::env::args_os()));
}
