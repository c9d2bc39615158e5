fn main() -> std::process::ExitCode {
    maximin_power::cli::main()
}
