fn main() {
    std::process::exit(fidelity_bounds_cli::run(std::env::args_os()));
}
