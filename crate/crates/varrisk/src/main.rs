fn main() {
    std::process::exit(varrisk::cli::run(std::env::args_os()));
}
