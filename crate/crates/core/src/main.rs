fn main() {
    std::process::exit(ns_certify::cli::main_with_args(std::env::args_os()));
}
