fn main() -> std::process::ExitCode {
    centipede::cli::main()
}
