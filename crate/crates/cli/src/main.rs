use clap::Parser;
use thincoalg_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let out = run(&cli);
    if cli.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&out.report).expect("reports serialize")
        );
    } else if out.code == 2 {
        eprintln!("{}", out.text);
    } else if !out.text.is_empty() {
        println!("{}", out.text);
    }
    std::process::exit(out.code);
}
