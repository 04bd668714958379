fn main() {
    std::process::exit(adiagap::cli::run());
}
