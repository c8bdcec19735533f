fn main() {
    std::process::exit(abbsim::cli::run_command(std::env::args_os()));
}
