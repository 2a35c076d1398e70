//! Regenerates `data/dealership_like.csv`.
//!
//!     cargo run -p fmrbench-cli --example make_dealership_csv

use std::fs::File;
use std::path::Path;

fn main() -> anyhow::Result<()> {
    let ds = fmrbench_core::synth::dealership_like(12, 24, 0.06, 20_240_601);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/dealership_like.csv");
    ds.write_csv(File::create(&path)?, "dealer")?;
    println!("wrote {} rows to {}", ds.n(), path.display());
    Ok(())
}
