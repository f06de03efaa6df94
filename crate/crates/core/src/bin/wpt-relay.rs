fn main() {
    std::process::exit(wpt_relay::cli::main_with_args(std::env::args_os()));
}
