//! DDPM noise schedule and forward-process sampling.
//!
//! A schedule is the precomputed table driving both diffusion directions:
//! linearly spaced betas, their running product `alpha_bar_t`, and the
//! reverse-step standard deviations. Reverse noise uses the constant
//! choice `sigma_t^2 = beta_t`, except `sigma_1 = 0`: the last step of a
//! reverse walk is deterministic.
//!
//! Steps are 1-based (`t` in `1..=T`) to match the usual indexing of
//! `beta_1..beta_T`.

use crate::error::{PfadError, Result};
use crate::image::{Field, Image};

/// Immutable diffusion schedule; shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    t_max: usize,
    beta: Vec<f64>,
    alpha_bar: Vec<f64>,
    sigma: Vec<f64>,
}

/// Builds a schedule with `T` linearly spaced betas over
/// `[beta_start, beta_end]`.
pub fn make_schedule(t_steps: usize, beta_start: f64, beta_end: f64) -> Result<NoiseSchedule> {
    if t_steps < 1 {
        return Err(PfadError::InvalidParam {
            name: "T",
            reason: "must be >= 1".into(),
        });
    }
    if !(beta_start.is_finite() && beta_end.is_finite())
        || beta_start <= 0.0
        || beta_start > beta_end
        || beta_end >= 1.0
    {
        return Err(PfadError::InvalidParam {
            name: "beta range",
            reason: format!("need 0 < {beta_start} <= {beta_end} < 1"),
        });
    }

    let mut beta = Vec::with_capacity(t_steps);
    let mut alpha_bar = Vec::with_capacity(t_steps);
    let mut sigma = Vec::with_capacity(t_steps);
    let mut running = 1.0_f64;
    for i in 0..t_steps {
        let b = if t_steps == 1 {
            beta_start
        } else if i == t_steps - 1 {
            // Pin the endpoint so the (start, end) pair survives a
            // serialize/rebuild round trip bit-exactly.
            beta_end
        } else {
            beta_start + (beta_end - beta_start) * i as f64 / (t_steps - 1) as f64
        };
        running *= 1.0 - b;
        beta.push(b);
        alpha_bar.push(running);
        sigma.push(if i == 0 { 0.0 } else { b.sqrt() });
    }
    Ok(NoiseSchedule {
        t_max: t_steps,
        beta,
        alpha_bar,
        sigma,
    })
}

impl NoiseSchedule {
    /// The paper-scale profile: 1000 steps, betas from 1e-4 to 2e-2.
    pub fn paper_profile() -> NoiseSchedule {
        make_schedule(1000, 1e-4, 2e-2).expect("fixed profile is valid")
    }

    /// Desk-scale profile for fast runs: 100 steps with the beta range
    /// scaled up tenfold, keeping the terminal signal level comparably
    /// small (alpha_bar_T well under 0.01).
    pub fn desk_profile() -> NoiseSchedule {
        make_schedule(100, 1e-3, 0.2).expect("fixed profile is valid")
    }

    /// Total step count `T`.
    pub fn t_max(&self) -> usize {
        self.t_max
    }

    /// `beta_t`, `t` in `1..=T`.
    pub fn beta(&self, t: usize) -> f64 {
        self.beta[t - 1]
    }

    /// `alpha_bar_t`, `t` in `1..=T`.
    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bar[t - 1]
    }

    /// Reverse-step standard deviation; 0 at `t = 1`.
    pub fn sigma(&self, t: usize) -> f64 {
        self.sigma[t - 1]
    }

    /// First/last beta, handy for serializing the schedule compactly.
    pub fn beta_range(&self) -> (f64, f64) {
        (self.beta[0], *self.beta.last().unwrap())
    }

    pub(crate) fn check_step(&self, t: usize) -> Result<()> {
        if t < 1 || t > self.t_max {
            return Err(PfadError::StepOutOfRange {
                step: t,
                t_max: self.t_max,
            });
        }
        Ok(())
    }
}

/// Jumps the forward process straight to step `t`:
/// `sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * noise`.
///
/// The result is a latent and may leave `[0, 1]`; nothing is clamped here.
pub fn forward_sample(
    schedule: &NoiseSchedule,
    x0: &Image,
    t: usize,
    noise: &Field,
) -> Result<Field> {
    schedule.check_step(t)?;
    if noise.dim() != x0.dims() {
        return Err(PfadError::ShapeMismatch {
            expected: x0.dims(),
            got: noise.dim(),
        });
    }
    let ab = schedule.alpha_bar(t);
    let signal = ab.sqrt();
    let spread = (1.0 - ab).sqrt();
    Ok(x0.data() * signal + noise * spread)
}
