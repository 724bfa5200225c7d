fn main() {
    std::process::exit(unidenoise::cli::main());
}
