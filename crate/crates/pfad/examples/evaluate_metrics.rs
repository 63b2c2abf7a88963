//! Scores two candidate restorations of the same corpus against the
//! clean references and asks whether their per-image quality scores
//! differ beyond chance, using the rank-sum test.
//!
//! ```text
//! cargo run --release --example evaluate_metrics
//! ```

use pfad::{
    generate_phantom, mann_whitney_u, metric_report, simulate_rigid, PhantomSpec,
    RigidMotionParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Two "methods": mild corruption and severe corruption of the same
    // clean images stand in for two restoration candidates.
    let mut mild = Vec::new();
    let mut severe = Vec::new();
    for seed in 0..12u64 {
        let clean = generate_phantom(&PhantomSpec {
            size: 64,
            ellipse_count: 5,
            intensity_range: (0.05, 0.95),
            seed,
        })?;
        for (delta, bucket) in [(0.8, &mut mild), (2.8, &mut severe)] {
            let img = simulate_rigid(
                &clean,
                &RigidMotionParams {
                    delta_k: delta,
                    rotation_deg: 0.5,
                    k0: std::f64::consts::PI / 10.0,
                    pixel_spacing_cm: 0.4,
                    seed: 0,
                },
            )?;
            bucket.push(metric_report(&img, &clean)?);
        }
    }

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let psnr_mild: Vec<f64> = mild.iter().map(|m| m.psnr).collect();
    let psnr_severe: Vec<f64> = severe.iter().map(|m| m.psnr).collect();
    println!(
        "mean psnr: mild {:.2} dB, severe {:.2} dB",
        mean(&psnr_mild),
        mean(&psnr_severe)
    );

    let u = mann_whitney_u(&psnr_mild, &psnr_severe)?;
    println!(
        "rank-sum: U = {:.1}, p = {:.6} (n = {} vs {})",
        u.u_statistic, u.p_value, u.n1, u.n2
    );
    if u.p_value < 0.05 {
        println!("the two corruption levels are distinguishable at the 5% level");
    }
    Ok(())
}
