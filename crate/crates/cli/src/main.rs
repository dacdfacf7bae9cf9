fn main() {
    std::process::exit(core_gauge_cli::run(std::env::args_os()));
}
