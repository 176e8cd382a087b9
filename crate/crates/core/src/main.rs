use clap::Parser;

use penta::cli::{run, Cli, EXIT_USAGE};

fn main() {
    if let Some(threads) = std::env::var("PENTA_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: PENTA_THREADS: {e}");
            std::process::exit(EXIT_USAGE);
        }
    }
    let cli = Cli::parse();
    let code = run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
