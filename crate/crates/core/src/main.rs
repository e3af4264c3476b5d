fn main() {
    std::process::exit(resonant_nls::cli::main());
}
