fn main() {
    std::process::exit(onebit_core::cli::cli_main(std::env::args_os()));
}
