fn main() {
    std::process::exit(rdpg::cli::cli_main(std::env::args_os()));
}
