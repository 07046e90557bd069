fn main() -> std::process::ExitCode {
    doa_bench::cli::run(std::env::args_os())
}
