//! Compares the purification variants against each other on one
//! corrupted phantom: frequency-domain only, pixel-domain only, both
//! branches blended, and the mask/weight arms.
//!
//! The oracle stands in for the network here, which flatters arms that
//! lean on generated content (with a perfect generator, unguided pixels
//! are perfect). Under a trained network the ordering flips and the
//! frequency branch wins; see the `pfad purify` command for that setup.
//!
//! ```text
//! cargo run --release --example ablation_arms
//! ```

use pfad::{
    generate_phantom, metric_report, purify_with, simulate_rigid, BranchMode, MaskMode,
    NoiseSchedule, OracleDenoiser, PhantomSpec, PurifyConfig, RigidMotionParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let clean = generate_phantom(&PhantomSpec {
        size: 64,
        ellipse_count: 5,
        intensity_range: (0.05, 0.95),
        seed: 8,
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
    let base = PurifyConfig {
        seed: 5,
        ..PurifyConfig::desk()
    };

    let arms: Vec<(&str, PurifyConfig)> = vec![
        ("frequency only", PurifyConfig { branch_mode: BranchMode::FrequencyOnly, ..base }),
        ("pixel only", PurifyConfig { branch_mode: BranchMode::PixelOnly, ..base }),
        ("both branches", base),
        ("no mask", PurifyConfig { mask_mode: MaskMode::NoGuidance, ..base }),
        ("unweighted mask", PurifyConfig { mask_mode: MaskMode::CheckerboardUnweighted, ..base }),
        ("full guidance", PurifyConfig { mask_mode: MaskMode::FullGuidance, ..base }),
    ];

    let before = metric_report(&corrupted, &clean)?;
    println!(
        "{:16} psnr {:6.2} dB  ssim {:.4}  gmsd {:.4}",
        "corrupted", before.psnr, before.ssim, before.gmsd
    );
    for (name, config) in arms {
        let (out, _) = purify_with(&corrupted, &config, &schedule, &oracle, None, 0)?;
        let m = metric_report(&out, &clean)?;
        println!(
            "{:16} psnr {:6.2} dB  ssim {:.4}  gmsd {:.4}",
            name, m.psnr, m.ssim, m.gmsd
        );
    }
    Ok(())
}
