fn main() {
    std::process::exit(facered::cli::run_from_env());
}
