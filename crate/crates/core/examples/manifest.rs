//! Run configuration: defaults, a TOML file, and `key=value` overrides,
//! folded into a manifest with a checksum.
//!
//! ```text
//! cargo run --example manifest
//! ```

use pistonbeam::manifest::RunManifest;

const CONFIG: &str = r#"
[beam]
k = 1.0
U = 600.0
lambda = 1
b0 = 1.0

[simulate]
t_end = 2.0
"#;

fn main() -> pistonbeam::Result<()> {
    let overrides = ["beam.b=-20".to_string(), "n_cells=50".to_string()];
    let m = RunManifest::parse_str(CONFIG, &overrides)?;
    print!("{}", m.emit());

    let beam = m.beam_config()?;
    println!("\n# model: berger = {}, k = {}, U = {}, b = {}", beam.berger, beam.k, beam.velocity, beam.b);

    // an override that names a key present in several tables is rejected
    match RunManifest::parse_str(CONFIG, &["t_end=1".to_string()]) {
        Ok(_) => unreachable!(),
        Err(e) => println!("# {e}"),
    }
    Ok(())
}
