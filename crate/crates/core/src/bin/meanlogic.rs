fn main() {
    std::process::exit(meanlogic::cli::main_with_env());
}
