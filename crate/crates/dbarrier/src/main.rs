fn main() {
    std::process::exit(dbarrier::run(std::env::args_os()));
}
