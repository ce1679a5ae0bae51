fn main() -> std::process::ExitCode {
    bezier_trunk::cli::main()
}
