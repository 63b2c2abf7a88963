//! The denoiser interface, the reverse diffusion step, and a cheating
//! oracle used to test the machinery around it.

use crate::error::{PfadError, Result};
use crate::image::{Field, Image};
use crate::schedule::NoiseSchedule;

/// Noise-prediction interface: given a latent `x_t` and its step `t`,
/// estimate the standard-normal field that was mixed in.
///
/// Implementations must return a finite field of the same shape and be
/// safe to call concurrently (weights are read-only at inference time).
pub trait Denoiser: Send + Sync {
    fn predict_noise(&self, x_t: &Field, t: usize) -> Result<Field>;
}

/// A denoiser that knows the clean answer.
///
/// Given any latent it returns the exact noise that would explain it:
/// `eps = (x_t - sqrt(alpha_bar_t) * target) / sqrt(1 - alpha_bar_t)`.
/// With this plugged into [`reverse_step`] the update becomes the analytic
/// posterior mean, which makes whole-loop behavior checkable without any
/// training.
#[derive(Debug, Clone)]
pub struct OracleDenoiser {
    target: Image,
    schedule: NoiseSchedule,
}

impl OracleDenoiser {
    pub fn new(target: Image, schedule: NoiseSchedule) -> Self {
        Self { target, schedule }
    }

    pub fn target(&self) -> &Image {
        &self.target
    }
}

impl Denoiser for OracleDenoiser {
    fn predict_noise(&self, x_t: &Field, t: usize) -> Result<Field> {
        self.schedule.check_step(t)?;
        if x_t.dim() != self.target.dims() {
            return Err(PfadError::ShapeMismatch {
                expected: self.target.dims(),
                got: x_t.dim(),
            });
        }
        let ab = self.schedule.alpha_bar(t);
        let signal = ab.sqrt();
        let spread = (1.0 - ab).sqrt();
        Ok((x_t - &(self.target.data() * signal)) / spread)
    }
}

/// One reverse diffusion step:
/// `mu + sigma_t * noise` with
/// `mu = (x_t - beta_t / sqrt(1 - alpha_bar_t) * eps_hat) / sqrt(1 - beta_t)`.
///
/// At `t = 1` the noise term is dropped (`sigma_1 = 0`), so the chain ends
/// deterministically. The result is an unclamped latent.
pub fn reverse_step(
    schedule: &NoiseSchedule,
    denoiser: &dyn Denoiser,
    x_t: &Field,
    t: usize,
    noise: &Field,
) -> Result<Field> {
    schedule.check_step(t)?;
    if noise.dim() != x_t.dim() {
        return Err(PfadError::ShapeMismatch {
            expected: x_t.dim(),
            got: noise.dim(),
        });
    }
    let eps_hat = denoiser.predict_noise(x_t, t)?;
    if eps_hat.dim() != x_t.dim() {
        return Err(PfadError::ShapeMismatch {
            expected: x_t.dim(),
            got: eps_hat.dim(),
        });
    }
    let beta = schedule.beta(t);
    let eps_scale = beta / (1.0 - schedule.alpha_bar(t)).sqrt();
    let mean_scale = 1.0 / (1.0 - beta).sqrt();
    let mut out = (x_t - &(eps_hat * eps_scale)) * mean_scale;
    let sigma = schedule.sigma(t);
    if sigma > 0.0 {
        out += &(noise * sigma);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{generate_phantom, PhantomSpec};
    use crate::schedule::{forward_sample, make_schedule};
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn phantom16(seed: u64) -> Image {
        generate_phantom(&PhantomSpec {
            size: 16,
            ellipse_count: 3,
            intensity_range: (0.1, 0.9),
            seed,
        })
        .unwrap()
    }

    fn normal_field(h: usize, w: usize, rng: &mut ChaCha12Rng) -> Field {
        Array2::from_shape_fn((h, w), |_| StandardNormal.sample(rng))
    }

    #[test]
    fn oracle_returns_the_exact_noise() {
        let s = make_schedule(60, 1e-3, 0.15).unwrap();
        let target = phantom16(1);
        let oracle = OracleDenoiser::new(target.clone(), s.clone());
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let eps = normal_field(16, 16, &mut rng);
        let x_t = forward_sample(&s, &target, 33, &eps).unwrap();
        let eps_hat = oracle.predict_noise(&x_t, 33).unwrap();
        for (a, b) in eps_hat.iter().zip(eps.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn final_step_with_oracle_lands_on_target() {
        // At t = 1 the posterior mean collapses onto the oracle's target no
        // matter where the latent currently is.
        let s = make_schedule(60, 1e-3, 0.15).unwrap();
        let target = phantom16(3);
        let oracle = OracleDenoiser::new(target.clone(), s.clone());
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let anywhere = normal_field(16, 16, &mut rng) * 3.0;
        let zero = Array2::zeros((16, 16));
        let x0 = reverse_step(&s, &oracle, &anywhere, 1, &zero).unwrap();
        for (a, b) in x0.iter().zip(target.data().iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn oracle_chain_walks_toward_the_target() {
        let s = make_schedule(50, 1e-3, 0.2).unwrap();
        let target = phantom16(5);
        let oracle = OracleDenoiser::new(target.clone(), s.clone());
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let mut x = normal_field(16, 16, &mut rng);

        let dist = |x: &Field, t: usize| -> f64 {
            let scale = if t == 0 { 1.0 } else { s.alpha_bar(t).sqrt() };
            x.iter()
                .zip(target.data().iter())
                .map(|(a, b)| (a - scale * b) * (a - scale * b))
                .sum::<f64>()
                .sqrt()
        };

        let start = dist(&x, 50);
        let mut mid = f64::NAN;
        for t in (1..=50).rev() {
            let noise = normal_field(16, 16, &mut rng);
            x = reverse_step(&s, &oracle, &x, t, &noise).unwrap();
            if t == 26 {
                mid = dist(&x, 25);
            }
        }
        let end = dist(&x, 0);
        assert!(mid < start, "chain should contract ({mid} !< {start})");
        assert!(end < 1e-9, "final step is exact with the oracle ({end})");
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let s = make_schedule(10, 1e-3, 0.1).unwrap();
        let oracle = OracleDenoiser::new(phantom16(7), s.clone());
        let zero16 = Array2::zeros((16, 16));
        let zero8 = Array2::zeros((8, 8));
        assert!(matches!(
            reverse_step(&s, &oracle, &zero8, 5, &zero8),
            Err(PfadError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            reverse_step(&s, &oracle, &zero16, 5, &zero8),
            Err(PfadError::ShapeMismatch { .. })
        ));
        assert!(reverse_step(&s, &oracle, &zero16, 11, &zero16).is_err());
    }
}
