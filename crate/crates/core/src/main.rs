fn main() {
    std::process::exit(echofit::cli::run());
}
