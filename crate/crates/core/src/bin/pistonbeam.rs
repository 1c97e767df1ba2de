fn main() {
    std::process::exit(pistonbeam::cli::main_with_args(std::env::args_os()));
}
