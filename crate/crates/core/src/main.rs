fn main() {
    std::process::exit(tsp_dual::cli::run_with_args(std::env::args_os()));
}
