use clap::Parser;

use hri_core::cli::{dispatch, Cli};

fn main() {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(report) => println!("{report}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
