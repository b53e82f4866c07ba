fn main() {
    std::process::exit(archmx_cli::run(std::env::args().skip(1).collect()));
}
