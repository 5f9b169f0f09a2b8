fn main() -> std::process::ExitCode {
    ozone_risk::cli::run(std::env::args_os())
}
