fn main() {
    std::process::exit(gou_ruin::cli::run(std::env::args_os()));
}
