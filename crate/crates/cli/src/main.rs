fn main() {
    std::process::exit(graphon_sample_cli::execute(std::env::args_os()));
}
