fn main() {
    std::process::exit(qcmod_cli::main_with_args(std::env::args_os()));
}
