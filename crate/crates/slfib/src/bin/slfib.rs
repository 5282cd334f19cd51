fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(slfib::cli_toolkit::run() as u8)
}
