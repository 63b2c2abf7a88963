//! Thin command-line entry point; all logic lives in `pfad::cli`.

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(pfad::cli::run(&args));
}
