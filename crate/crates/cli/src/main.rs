use clap::Parser;

fn main() {
    let cli = nsp_lab::Cli::parse();
    std::process::exit(nsp_lab::run(cli));
}
