fn main() {
    std::process::exit(orbavg_cli::run(std::env::args_os()));
}
