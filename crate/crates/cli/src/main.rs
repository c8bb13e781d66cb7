fn main() {
    std::process::exit(soilsense_cli::run(std::env::args_os()));
}
