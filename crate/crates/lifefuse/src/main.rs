fn main() {
    let seed = std::env::var(lifefuse::config::SEED_ENV).ok();
    std::process::exit(lifefuse::cli(std::env::args_os(), seed.as_deref()));
}
