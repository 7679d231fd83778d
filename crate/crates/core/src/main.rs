fn main() {
    std::process::exit(maxcut_qaoa::cli::main());
}
