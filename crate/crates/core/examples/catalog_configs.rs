//! Writes every catalog setup as a TOML config into a directory (default `configs`).

use std::path::PathBuf;

use bregman_vi::harness::catalog::{by_name, NAMES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "configs".into()));
    std::fs::create_dir_all(&dir)?;
    for name in NAMES {
        let cfg = by_name(name, 100_000).expect("catalog name");
        let path = dir.join(format!("{name}.toml"));
        std::fs::write(&path, cfg.to_toml()?)?;
        println!("{}", path.display());
    }
    Ok(())
}
