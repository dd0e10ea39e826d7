fn main() {
    std::process::exit(qmiso::cli::run(std::env::args_os()));
}
