//! The full synthetic pipeline with its consistency checks.
//!
//! Output goes to `$ECHOFIT_OUT_DIR/demo` or a temp directory.

use echofit::demo::{run_demo, DemoConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = std::env::var_os("ECHOFIT_OUT_DIR").map_or_else(std::env::temp_dir, Into::into);
    let dir = base.join("demo");
    let out = run_demo(&DemoConfig::default(), &dir)?;
    for c in &out.checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("{} files in {}", out.files.len(), dir.display());
    Ok(())
}
