fn main() {
    std::process::exit(erws::cli::cli_dispatch(std::env::args_os()));
}
