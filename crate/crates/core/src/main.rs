fn main() {
    std::process::exit(arnold_lab::cli::run(std::env::args_os()));
}
