fn main() {
    std::process::exit(garch_intensity::cli::run_from_env());
}
