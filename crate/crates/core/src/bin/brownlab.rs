fn main() {
    std::process::exit(brownlab::cli::main_entry());
}
