fn main() {
    std::process::exit(dks_core::cli::run_command(std::env::args_os()));
}
