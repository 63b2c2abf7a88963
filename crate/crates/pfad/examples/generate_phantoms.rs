//! Generates a small corpus of synthetic ellipse phantoms and writes
//! them as 16-bit PNGs.
//!
//! ```text
//! cargo run --release --example generate_phantoms -- [out_dir]
//! ```

use pfad::{generate_phantom, save_png16, PhantomSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "phantoms_out".to_string());
    std::fs::create_dir_all(&out)?;

    for i in 0..8u64 {
        let img = generate_phantom(&PhantomSpec {
            size: 64,
            ellipse_count: 5,
            intensity_range: (0.05, 0.95),
            seed: i,
        })?;
        let (lo, hi) = img
            .data()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let path = format!("{out}/phantom_{i:02}.png");
        save_png16(path.as_ref(), &img)?;
        println!("{path}: {}x{}, range [{lo:.3}, {hi:.3}]", img.height(), img.width());
    }
    println!("wrote 8 phantoms to {out}/");
    Ok(())
}
