fn main() {
    std::process::exit(branching_stable_cli::run(std::env::args_os()));
}
