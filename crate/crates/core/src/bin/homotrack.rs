use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HOMOTRACK_LOG", "warn")).init();
    let code = homotrack::cli::run(homotrack::cli::Cli::parse());
    std::process::exit(code);
}
