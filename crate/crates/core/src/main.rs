use clap::Parser;
use steane_xai::cli::{run, Cli};

fn main() {
    match run(Cli::parse()) {
        Ok(out) => println!("{out}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
