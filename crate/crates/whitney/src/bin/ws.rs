use clap::Parser;

#[derive(Parser)]
#[command(name = "ws")]
struct Cli {}

fn main() {
    let _ = Cli::parse();
}
