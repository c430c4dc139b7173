fn main() {
    std::process::exit(foldnet::cli::run(std::env::args_os()));
}
