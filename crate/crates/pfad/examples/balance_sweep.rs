//! Sweeps the branch-balance hyperparameter `a` and prints the combined
//! quality total for each setting. Larger `a` leans on the pixel-domain
//! branch in the late steps; smaller `a` leans on the frequency branch.
//!
//! ```text
//! cargo run --release --example balance_sweep
//! ```

use pfad::{
    generate_phantom, metric_report, purify_with, simulate_rigid, NoiseSchedule, OracleDenoiser,
    PhantomSpec, PurifyConfig, RigidMotionParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let clean = generate_phantom(&PhantomSpec {
        size: 64,
        ellipse_count: 5,
        intensity_range: (0.05, 0.95),
        seed: 30,
    })?;
    let corrupted = simulate_rigid(
        &clean,
        &RigidMotionParams {
            delta_k: 2.8,
            rotation_deg: 1.5,
            k0: std::f64::consts::PI / 10.0,
            pixel_spacing_cm: 0.4,
            seed: 0,
        },
    )?;

    let schedule = NoiseSchedule::desk_profile();
    let oracle = OracleDenoiser::new(clean.clone(), schedule.clone());

    println!("a      psnr     ssim    gmsd    combined");
    for a in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let config = PurifyConfig {
            balance_a: a,
            seed: 5,
            ..PurifyConfig::desk()
        };
        let (out, _) = purify_with(&corrupted, &config, &schedule, &oracle, None, 0)?;
        let m = metric_report(&out, &clean)?;
        println!(
            "{a:.1}  {:7.2}  {:.4}  {:.4}  {:8.3}",
            m.psnr,
            m.ssim,
            m.gmsd,
            m.combined_total()
        );
    }
    Ok(())
}
