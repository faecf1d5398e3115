//! Drive the sweep machinery from a manifest, the same path the CLI uses,
//! and print the merged dichotomy table.
//!
//!     cargo run --release --example parameter_sweep

use ringcascade::cli::cmd_sweep;
use ringcascade::manifest::Manifest;

fn main() -> ringcascade::Result<()> {
    let text = "\
kind = sweep
[cascade]
model = flattened
eps = 1.0
[sweep]
kind = dichotomy
alpha_list = 0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45
m = 512
t = 1.0
fit_k_min = 64
fit_k_max = 512
workers = 4
";
    let manifest = Manifest::parse(text, "inline")?;
    let out_dir = std::env::temp_dir().join("ringcascade_sweep");
    let artifacts = cmd_sweep(&manifest, &out_dir)?;
    println!("{}", std::fs::read_to_string(&artifacts.text)?);
    println!("json report: {}", artifacts.json.display());
    Ok(())
}
