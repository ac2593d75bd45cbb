fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(spectral_calculus::cli::run(&args));
}
