fn main() -> std::process::ExitCode {
    lowcut::cli::main()
}
