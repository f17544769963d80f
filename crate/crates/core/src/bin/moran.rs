fn main() {
    std::process::exit(moran_core::cli::main_with_args(std::env::args_os()));
}
