fn main() {
    std::process::exit(epitrigger::cli_main(std::env::args_os()));
}
