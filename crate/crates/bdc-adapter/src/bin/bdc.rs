fn main() {
    std::process::exit(bdc_adapter::cli::run_from_env());
}
