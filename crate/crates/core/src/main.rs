fn main() {
    std::process::exit(odtsim::cli::main_with_args(std::env::args_os()));
}
