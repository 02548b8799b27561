fn main() {
    std::process::exit(holodyn_cli::cli::main_with_args(std::env::args()));
}
