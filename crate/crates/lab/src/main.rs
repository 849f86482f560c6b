use clap::Parser;

fn main() {
    let cli = vqlip_lab::cli::Cli::parse();
    if let Err(err) = vqlip_lab::cli::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
