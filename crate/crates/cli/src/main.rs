fn main() {
    std::process::exit(watermelon_cli::run(std::env::args_os()));
}
