fn main() {
    std::process::exit(opfilter_cli::run(std::env::args_os()));
}
