fn main() {
    tracing_subscriber::fmt().with_writer(std::io::stderr).with_target(false).init();
    std::process::exit(termscape::cli::run(std::env::args_os()));
}
