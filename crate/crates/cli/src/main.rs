fn main() {
    std::process::exit(hypercsi_cli::run(std::env::args_os()));
}
