fn main() {
    std::process::exit(deskmpp::cli::dispatch(std::env::args_os()));
}
