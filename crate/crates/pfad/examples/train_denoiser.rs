//! Trains the toy noise-prediction network on a synthetic phantom corpus
//! and reports the held-out loss before and after.
//!
//! ```text
//! cargo run --release --example train_denoiser
//! ```

use std::time::Instant;

use pfad::{generate_phantom, train_toy_denoiser, NoiseSchedule, PhantomSpec, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus: Vec<_> = (0..256)
        .map(|i| {
            generate_phantom(&PhantomSpec {
                size: 64,
                ellipse_count: 5,
                intensity_range: (0.05, 0.95),
                seed: 1000 + i,
            })
        })
        .collect::<Result<_, _>>()?;

    let schedule = NoiseSchedule::desk_profile();
    let config = TrainConfig::desk();
    println!(
        "training: {} images, {} steps, batch {}, lr {}",
        corpus.len(),
        config.steps,
        config.batch_size,
        config.lr
    );

    let started = Instant::now();
    let (net, report) = train_toy_denoiser(&corpus, &schedule, &config)?;
    let elapsed = started.elapsed();

    println!("parameters:   {}", net.param_count());
    println!("initial loss: {:.4}", report.initial_loss);
    println!("final loss:   {:.4}", report.final_loss);
    println!(
        "ratio:        {:.3} ({} steps in {:.1?})",
        report.final_loss / report.initial_loss,
        report.steps,
        elapsed
    );
    Ok(())
}
