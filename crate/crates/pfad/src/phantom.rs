//! Synthetic ellipse phantoms.
//!
//! A stand-in for real scan data when exercising the pipeline at desk
//! scale: overlapping soft-edged ellipses on a dark background, fully
//! determined by a seed. The first ellipse is always a centered disc so a
//! single-ellipse phantom is rotationally symmetric; later ellipses get
//! random centers, axes, angles and intensities.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{PfadError, Result};
use crate::image::Image;

/// Parameters of one synthetic phantom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhantomSpec {
    /// Side length in pixels (square image), at least 16.
    pub size: usize,
    /// Number of ellipses, at least 1.
    pub ellipse_count: usize,
    /// `(lo, hi)` with `0 <= lo < hi <= 1`; the background maps to `lo` and
    /// the brightest structure to at most `hi`.
    pub intensity_range: (f64, f64),
    /// Seed; equal seeds give bit-identical phantoms.
    pub seed: u64,
}

impl PhantomSpec {
    fn validate(&self) -> Result<()> {
        if self.size < 16 {
            return Err(PfadError::InvalidParam {
                name: "size",
                reason: format!("{} < 16", self.size),
            });
        }
        if self.ellipse_count < 1 {
            return Err(PfadError::InvalidParam {
                name: "ellipse_count",
                reason: "must be >= 1".into(),
            });
        }
        let (lo, hi) = self.intensity_range;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(PfadError::InvalidParam {
                name: "intensity_range",
                reason: format!("({lo}, {hi}) must satisfy 0 <= lo < hi <= 1"),
            });
        }
        Ok(())
    }
}

/// One rasterizable ellipse in pixel coordinates.
struct Ellipse {
    cy: f64,
    cx: f64,
    semi_y: f64,
    semi_x: f64,
    angle: f64,
    /// Normalized intensity in [0, 1]; mapped into `intensity_range` last.
    value: f64,
}

/// Edge transition width in pixels.
const EDGE_SOFTNESS_PX: f64 = 1.5;

/// Generates a phantom. Deterministic for a given spec.
pub fn generate_phantom(spec: &PhantomSpec) -> Result<Image> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let s = spec.size as f64;
    let center = (s - 1.0) / 2.0;

    // Sample every ellipse up front so the draw order is easy to audit.
    let mut ellipses = Vec::with_capacity(spec.ellipse_count);
    let base_radius = s * rng.gen_range(0.36..0.46);
    ellipses.push(Ellipse {
        cy: center,
        cx: center,
        semi_y: base_radius,
        semi_x: base_radius,
        angle: 0.0,
        value: rng.gen_range(0.55..0.85),
    });
    for _ in 1..spec.ellipse_count {
        ellipses.push(Ellipse {
            cy: center + s * rng.gen_range(-0.22..0.22),
            cx: center + s * rng.gen_range(-0.22..0.22),
            semi_y: s * rng.gen_range(0.06..0.22),
            semi_x: s * rng.gen_range(0.06..0.22),
            angle: rng.gen_range(0.0..std::f64::consts::PI),
            value: rng.gen_range(0.15..0.95),
        });
    }

    let mut canvas: Array2<f64> = Array2::zeros((spec.size, spec.size));
    for e in &ellipses {
        let (sin_a, cos_a) = e.angle.sin_cos();
        let reach = e.semi_y.max(e.semi_x) + EDGE_SOFTNESS_PX;
        // Only touch the ellipse's bounding box.
        let r0 = ((e.cy - reach).floor().max(0.0)) as usize;
        let r1 = ((e.cy + reach).ceil().min(s - 1.0)) as usize;
        let c0 = ((e.cx - reach).floor().max(0.0)) as usize;
        let c1 = ((e.cx + reach).ceil().min(s - 1.0)) as usize;
        for r in r0..=r1 {
            for c in c0..=c1 {
                let dy = r as f64 - e.cy;
                let dx = c as f64 - e.cx;
                // Rotate into the ellipse frame, measure normalized radius.
                let u = (cos_a * dx + sin_a * dy) / e.semi_x;
                let v = (-sin_a * dx + cos_a * dy) / e.semi_y;
                let radius = (u * u + v * v).sqrt();
                // Approximate distance inside the boundary, in pixels.
                let depth = (1.0 - radius) * e.semi_x.min(e.semi_y);
                let alpha = smoothstep(depth / EDGE_SOFTNESS_PX);
                if alpha > 0.0 {
                    let cur = canvas[[r, c]];
                    canvas[[r, c]] = cur + alpha * (e.value - cur);
                }
            }
        }
    }

    let (lo, hi) = spec.intensity_range;
    Image::new(canvas.mapv(|a| lo + (hi - lo) * a))
}

/// Cubic smoothstep of `t` clamped to [0, 1].
fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}
