fn main() {
    std::process::exit(sltransmute::cli::run(std::env::args_os()));
}
