fn main() {
    std::process::exit(treelearn::cli::run());
}
