//! Writes the golden tensors as JSON files, evaluated from their CP
//! descriptions.
//!
//! ```text
//! cargo run -p tensorspec --example gen_fixtures -- crates/cli/tests/fixtures
//! ```

use std::path::PathBuf;

use tensorspec::{golden, io::write_tensor};

fn main() -> tensorspec::Result<()> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "crates/cli/tests/fixtures".into()),
    );
    std::fs::create_dir_all(&dir)?;
    write_tensor(dir.join("paperT.json"), &golden::counterexample())?;
    for (i, t) in golden::eight_tensors().iter().enumerate() {
        write_tensor(dir.join(format!("eight_{}.json", i + 1)), t)?;
    }
    println!("wrote 9 fixtures to {}", dir.display());
    Ok(())
}
