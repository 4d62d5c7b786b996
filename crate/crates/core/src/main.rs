fn main() {
    std::process::exit(bictx_core::cli::run(std::env::args_os()));
}
