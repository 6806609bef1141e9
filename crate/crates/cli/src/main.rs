fn main() {
    // no environment-driven configuration: the log level is fixed
    env_logger::Builder::new().filter_level(log::LevelFilter::Warn).format_timestamp(None).init();
    std::process::exit(spinladder_cli::run_cli(std::env::args_os()));
}
