fn main() {
    let args: Vec<String> = std::env::args().collect();
    let (code, out) = mkh::cli::run(&args);
    if code == 0 {
        print!("{out}");
    } else {
        eprint!("{out}");
    }
    std::process::exit(code);
}
