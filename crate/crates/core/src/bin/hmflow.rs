fn main() {
    std::process::exit(hmflow_core::cli::run(std::env::args_os()));
}
