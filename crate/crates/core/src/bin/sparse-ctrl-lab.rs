fn main() -> std::process::ExitCode {
    sparse_ctrl::cli::main()
}
