fn main() {
    eprintln!("continua: not yet wired up");
    std::process::exit(4);
}
