fn main() {
    std::process::exit(dcd::cli::main());
}
