fn main() {
    std::process::exit(nocollapse::cli::main());
}
