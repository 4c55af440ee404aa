fn main() {
    std::process::exit(delta_jacobi::cli::main_with_args(std::env::args_os()));
}
