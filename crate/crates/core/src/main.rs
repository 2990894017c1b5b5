fn main() {
    std::process::exit(vae_debias::cli::run(std::env::args_os()));
}
