fn main() {
    let threads = std::env::var(pt_forge_cli::THREADS_ENV).ok();
    std::process::exit(pt_forge_cli::run(std::env::args_os().collect(), threads.as_deref()));
}
