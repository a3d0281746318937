fn main() {
    std::process::exit(limitset_cli::run(std::env::args_os()));
}
