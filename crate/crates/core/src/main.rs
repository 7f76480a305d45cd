fn main() {
    let code = std::panic::catch_unwind(|| nrep::cli::run(std::env::args_os())).unwrap_or(3);
    std::process::exit(code);
}
