fn main() {
    std::process::exit(isoclouds::cli::run());
}
