use clap::Parser;
use hamroot_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let outcome = run(&cli);
    if !cli.common.quiet {
        println!("{}", outcome.message);
        if let Some(path) = &outcome.report_path {
            println!("report: {}", path.display());
        }
    } else if outcome.status.code() == 2 {
        eprintln!("{}", outcome.message);
    }
    std::process::exit(outcome.status.code());
}
