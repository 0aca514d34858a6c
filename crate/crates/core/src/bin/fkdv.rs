fn main() {
    std::process::exit(fkdv_core::experiment_io::cli::run_cli(std::env::args_os()));
}
