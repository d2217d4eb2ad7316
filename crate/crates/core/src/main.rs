fn main() {
    std::process::exit(twolayer::cli::main_from_env());
}
