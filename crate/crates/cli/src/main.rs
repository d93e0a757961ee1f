fn main() {
    std::process::exit(netcascade_cli::run());
}
