fn main() {
    std::process::exit(hemi_ns::cli::run(std::env::args_os()));
}
