fn main() {
    std::process::exit(harmonic_gasket_cli::run(std::env::args_os()));
}
