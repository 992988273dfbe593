fn main() {
    std::process::exit(taptest::cli::main_exit());
}
