fn main() {
    if let Err(err) = lpbfseg::cli::run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
