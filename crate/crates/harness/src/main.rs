fn main() {
    std::process::exit(fdwave_harness::cli::main_with_args(std::env::args_os()));
}
