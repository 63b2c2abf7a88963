//! Checkerboard guidance masks and their per-step weights.
//!
//! Purification steers the reverse walk with a binary checkerboard that
//! flips parity every step, so over any two consecutive steps every pixel
//! is guided exactly once. The binary mask is scaled by `omega_t`, which
//! grows from ~0 (late, clean steps: trust the generator) to ~1 (early,
//! noisy steps: trust the input), and the two domains' results are blended
//! by `gamma_t`.

use ndarray::Array2;

use crate::error::{PfadError, Result};
use crate::image::Field;
use crate::schedule::NoiseSchedule;

/// Binary checkerboard: pixel `(r, c)` is on iff
/// `(r / grid_size + c / grid_size + parity)` is even.
///
/// `parity` selects which color is "on"; flipping it yields the exact
/// complement. `grid_size` must be at least 1 (checked by [`MaskState`] and
/// the purify configuration; violating it here is a caller bug).
pub fn checkerboard(height: usize, width: usize, grid_size: usize, parity: u8) -> Field {
    assert!(grid_size >= 1, "checkerboard grid_size must be >= 1");
    Array2::from_shape_fn((height, width), |(r, c)| {
        if (r / grid_size + c / grid_size + parity as usize) % 2 == 0 {
            1.0
        } else {
            0.0
        }
    })
}

/// The checkerboard a given step sees, as a value type: geometry plus the
/// parity bit that alternates along the reverse walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskState {
    pub grid_size: usize,
    pub parity: u8,
    pub height: usize,
    pub width: usize,
}

impl MaskState {
    pub fn new(height: usize, width: usize, grid_size: usize, parity: u8) -> Result<Self> {
        if grid_size < 1 || grid_size > height.min(width) {
            return Err(PfadError::InvalidParam {
                name: "grid_size",
                reason: format!("{grid_size} not in 1..={}", height.min(width)),
            });
        }
        Ok(Self {
            grid_size,
            parity: parity & 1,
            height,
            width,
        })
    }

    /// Renders the binary mask.
    pub fn mask(&self) -> Field {
        checkerboard(self.height, self.width, self.grid_size, self.parity)
    }

    /// The next step's state: same geometry, opposite color.
    pub fn flipped(&self) -> MaskState {
        MaskState {
            parity: self.parity ^ 1,
            ..*self
        }
    }
}

/// Guidance weight `omega_t = 1 - sqrt(alpha_bar_t)`, in `[0, 1]`.
pub fn mask_weight(schedule: &NoiseSchedule, t: usize) -> Result<f64> {
    schedule.check_step(t)?;
    Ok(1.0 - schedule.alpha_bar(t).sqrt())
}

/// Dual-domain balance `gamma_t = -a * exp(-t / T) + 1`.
///
/// `a = 0` keeps the frequency branch only (`gamma == 1` for every step);
/// as `t` shrinks toward 0 the value approaches `1 - a`.
pub fn gamma(t: usize, t_max: usize, a: f64) -> f64 {
    1.0 - a * (-(t as f64) / t_max as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{make_schedule, NoiseSchedule};

    #[test]
    fn grid16_on_256_covers_exactly_half() {
        let m = checkerboard(256, 256, 16, 0);
        let on: f64 = m.sum();
        assert_eq!(on, 32768.0);
    }

    #[test]
    fn parity_flip_is_the_exact_complement() {
        for grid in [1, 3, 16] {
            let a = checkerboard(40, 56, grid, 0);
            let b = checkerboard(40, 56, grid, 1);
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(x + y, 1.0);
            }
        }
    }

    #[test]
    fn unit_grid_alternates_adjacent_pixels() {
        let m = checkerboard(8, 8, 1, 0);
        for r in 0..8 {
            for c in 0..7 {
                assert_ne!(m[[r, c]], m[[r, c + 1]]);
            }
        }
        for r in 0..7 {
            for c in 0..8 {
                assert_ne!(m[[r, c]], m[[r + 1, c]]);
            }
        }
    }

    #[test]
    fn mask_state_flips_and_validates() {
        let s = MaskState::new(64, 64, 16, 0).unwrap();
        assert_eq!(s.flipped().parity, 1);
        assert_eq!(s.flipped().flipped(), s);
        let m = s.mask();
        let f = s.flipped().mask();
        for (x, y) in m.iter().zip(f.iter()) {
            assert_eq!(x + y, 1.0);
        }
        assert!(MaskState::new(64, 64, 0, 0).is_err());
        assert!(MaskState::new(64, 64, 65, 0).is_err());
    }

    #[test]
    fn mask_weight_formula_cases() {
        // alpha_bar = 0.25 exactly -> omega = 0.5.
        let s = make_schedule(1, 0.75, 0.75).unwrap();
        assert_eq!(mask_weight(&s, 1).unwrap(), 0.5);

        // Near-unit alpha_bar -> omega near 0.
        let s = make_schedule(1, 1e-12, 1e-12).unwrap();
        assert!(mask_weight(&s, 1).unwrap() < 1e-9);

        // Deep-noise end of the shipped profiles -> omega near 1.
        for s in [NoiseSchedule::paper_profile(), NoiseSchedule::desk_profile()] {
            let t = s.t_max();
            let w = mask_weight(&s, t).unwrap();
            assert!((1.0 - w).abs() < 0.01, "omega_T = {w}");
        }

        assert!(mask_weight(&NoiseSchedule::desk_profile(), 0).is_err());
        assert!(mask_weight(&NoiseSchedule::desk_profile(), 101).is_err());
    }

    #[test]
    fn mask_weight_shrinks_as_t_decreases() {
        let s = NoiseSchedule::desk_profile();
        let mut prev = mask_weight(&s, 100).unwrap();
        for t in (1..100).rev() {
            let w = mask_weight(&s, t).unwrap();
            assert!(w <= prev);
            assert!((0.0..=1.0).contains(&w));
            prev = w;
        }
    }

    #[test]
    fn gamma_formula_cases() {
        // a = 0: pure frequency pipeline at every step.
        for t in 1..=10 {
            assert_eq!(gamma(t, 10, 0.0), 1.0);
        }
        // Endpoint arithmetic at the default balance.
        let g = gamma(1000, 1000, 0.7);
        assert!((g - (1.0 - 0.7 / std::f64::consts::E)).abs() < 1e-12);
        assert!((g - 0.7425).abs() < 1e-3);
        // Early-step limit approaches 1 - a.
        assert!((gamma(1, 100_000, 0.7) - 0.3).abs() < 1e-4);
    }

    #[test]
    fn gamma_shrinks_as_t_decreases_for_positive_a() {
        let mut prev = gamma(100, 100, 0.7);
        for t in (1..100).rev() {
            let g = gamma(t, 100, 0.7);
            assert!(g <= prev);
            prev = g;
        }
    }
}
