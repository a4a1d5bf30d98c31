fn main() {
    std::process::exit(geocurrents_experiments::cli::run_cli(std::env::args_os()));
}
