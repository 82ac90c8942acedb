fn main() {
    std::process::exit(doca::toolkit::cli_dispatch(std::env::args_os()));
}
