fn main() {
    std::process::exit(mch2::harness::run_cli(std::env::args_os()));
}
