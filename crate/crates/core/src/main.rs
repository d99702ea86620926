fn main() -> std::process::ExitCode {
    satrisk::cli::main_with_args(std::env::args_os())
}
