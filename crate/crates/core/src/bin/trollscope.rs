fn main() {
    std::process::exit(trollscope::cli::dispatch(std::env::args_os()));
}
