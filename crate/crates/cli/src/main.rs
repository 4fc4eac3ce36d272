fn main() {
    std::process::exit(cohesive_cli::run(std::env::args_os()));
}
