fn main() {
    std::process::exit(nonthermal::cli::run(std::env::args_os()));
}
