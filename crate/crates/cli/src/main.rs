fn main() {
    std::process::exit(truthy_cli::run(std::env::args_os().skip(1)).code());
}
