fn main() {
    std::process::exit(gssl::cli::main());
}
