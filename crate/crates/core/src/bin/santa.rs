fn main() {
    std::process::exit(santa_core::gap_report::cli_main(std::env::args_os()));
}
