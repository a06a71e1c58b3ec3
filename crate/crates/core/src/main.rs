fn main() {
    std::process::exit(cardproto::cli::main_from_env());
}
