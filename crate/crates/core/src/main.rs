fn main() -> std::process::ExitCode {
    intonation::cli::main()
}
