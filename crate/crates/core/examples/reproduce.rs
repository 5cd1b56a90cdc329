use std::path::Path;

use survcobra::experiment::{load_config_dir, reproduce};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let dir = args.get(1).map(String::as_str).unwrap_or("configs");
    let out = args
        .get(2)
        .map(String::as_str)
        .unwrap_or("target/reproduce");
    let started = std::time::Instant::now();
    let report = reproduce(&load_config_dir(Path::new(dir))?, Path::new(out))?;
    println!("{}", report.to_markdown());
    eprintln!("elapsed: {:.1?}", started.elapsed());
    Ok(())
}
