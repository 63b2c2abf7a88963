//! K-space motion-artifact simulation.
//!
//! Motion during acquisition leaves low-frequency phase-encode lines
//! (gathered near the motion-free center of the scan) intact and corrupts
//! the high-frequency ones. Both models here implement that as a per-row
//! phase perturbation of the spectrum: rows with `|k_y| <= k0` are copied
//! from the clean spectrum bit for bit, rows above the onset frequency are
//! multiplied by `exp(-j * phi(k_y))`.
//!
//! * rigid motion: a linear phase ramp (translation of `delta_k` cm) plus
//!   replacement of the perturbed rows by the spectrum of the rotated
//!   image;
//! * respiratory motion: a sinusoidally modulated ramp
//!   `phi(k_y) = k_y * delta * sin(m * k_y + n)`.
//!
//! `delta_k` is given in cm and converted to pixels through
//! `pixel_spacing_cm`. The row (height) axis plays the role of the
//! phase-encode axis throughout.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{PfadError, Result};
use crate::image::Image;
use crate::kspace::{axis_frequencies, dft2, dft2_field, idft2, magnitude, KSpaceGrid};

/// Rigid (translation + rotation) motion event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotionParams {
    /// Translation magnitude in cm (typical corpus range 2.5–3.0).
    pub delta_k: f64,
    /// In-plane rotation in degrees, `|rotation_deg| <= 90`.
    pub rotation_deg: f64,
    /// Onset frequency in radians: rows with `|k_y| <= k0` stay clean.
    pub k0: f64,
    /// Pixel pitch used to convert cm to pixels.
    pub pixel_spacing_cm: f64,
    /// Seed recorded alongside the sampled parameters for provenance.
    pub seed: u64,
}

impl RigidMotionParams {
    fn validate(&self) -> Result<()> {
        check_common(self.delta_k, self.k0, self.pixel_spacing_cm)?;
        if !self.rotation_deg.is_finite() || self.rotation_deg.abs() > 90.0 {
            return Err(PfadError::InvalidParam {
                name: "rotation_deg",
                reason: format!("{} not in [-90, 90]", self.rotation_deg),
            });
        }
        Ok(())
    }
}

/// Respiratory (periodic) motion event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RespiratoryParams {
    /// Oscillation amplitude in cm (typical corpus range 1.1–1.2).
    pub delta_k: f64,
    /// Sinusoid period parameter `m` (dimensionless, > 0).
    pub period_m: f64,
    /// Phase offset `n` in radians, in `[0, 2*pi)`.
    pub phase_n: f64,
    /// Onset frequency in radians.
    pub k0: f64,
    /// Pixel pitch used to convert cm to pixels.
    pub pixel_spacing_cm: f64,
    /// Seed recorded alongside the sampled parameters for provenance.
    pub seed: u64,
}

impl RespiratoryParams {
    fn validate(&self) -> Result<()> {
        check_common(self.delta_k, self.k0, self.pixel_spacing_cm)?;
        if !self.period_m.is_finite() || self.period_m <= 0.0 {
            return Err(PfadError::InvalidParam {
                name: "period_m",
                reason: format!("{} must be > 0", self.period_m),
            });
        }
        if !self.phase_n.is_finite()
            || !(0.0..2.0 * std::f64::consts::PI).contains(&self.phase_n)
        {
            return Err(PfadError::InvalidParam {
                name: "phase_n",
                reason: format!("{} not in [0, 2*pi)", self.phase_n),
            });
        }
        Ok(())
    }
}

fn check_common(delta_k: f64, k0: f64, pixel_spacing_cm: f64) -> Result<()> {
    if !delta_k.is_finite() || delta_k < 0.0 {
        return Err(PfadError::InvalidParam {
            name: "delta_k",
            reason: format!("{delta_k} must be >= 0"),
        });
    }
    if !k0.is_finite() || k0 <= 0.0 || k0 >= std::f64::consts::PI {
        return Err(PfadError::InvalidParam {
            name: "k0",
            reason: format!("{k0} not in (0, pi)"),
        });
    }
    if !pixel_spacing_cm.is_finite() || pixel_spacing_cm <= 0.0 {
        return Err(PfadError::InvalidParam {
            name: "pixel_spacing_cm",
            reason: format!("{pixel_spacing_cm} must be > 0"),
        });
    }
    Ok(())
}

/// Multiplies every row with `|k_y| > k0` by `exp(-j * phi(k_y))`; rows in
/// the center band are copied untouched.
pub fn perturb_phase(
    grid: &KSpaceGrid,
    phi: impl Fn(f64) -> f64,
    k0: f64,
) -> Result<KSpaceGrid> {
    if !k0.is_finite() || k0 <= 0.0 || k0 >= std::f64::consts::PI {
        return Err(PfadError::InvalidParam {
            name: "k0",
            reason: format!("{k0} not in (0, pi)"),
        });
    }
    let (h, _) = grid.dims();
    let ky = axis_frequencies(h);
    let mut out = grid.data().clone();
    for (r, mut row) in out.rows_mut().into_iter().enumerate() {
        if ky[r].abs() <= k0 {
            continue;
        }
        let p = phi(ky[r]);
        if !p.is_finite() {
            return Err(PfadError::InvalidParam {
                name: "phi",
                reason: format!("non-finite phase {p} at k_y = {}", ky[r]),
            });
        }
        let mult = Complex64::from_polar(1.0, -p);
        for z in row.iter_mut() {
            *z *= mult;
        }
    }
    KSpaceGrid::new(out)
}

/// The corrupted spectrum of a rigid-motion event, before the magnitude and
/// clamp that [`simulate_rigid`] applies on emission. Exposed so the
/// band-preservation invariants can be checked where they actually hold.
pub fn rigid_kspace(clean: &Image, params: &RigidMotionParams) -> Result<KSpaceGrid> {
    params.validate()?;
    let f_clean = dft2(clean);
    // Spectrum supplying the perturbed rows: the rotated image (identical
    // to the clean spectrum when no rotation is requested).
    let f_moved = if params.rotation_deg == 0.0 {
        f_clean.clone()
    } else {
        dft2_field(&rotate_bilinear(clean.data(), params.rotation_deg))
    };

    let (h, _) = clean.dims();
    let ky = axis_frequencies(h);
    let shift_px = params.delta_k / params.pixel_spacing_cm;
    let mut out = f_clean.data().clone();
    for (r, mut row) in out.rows_mut().into_iter().enumerate() {
        if ky[r].abs() <= params.k0 {
            continue; // center band: clean rows, bit for bit
        }
        let ramp = Complex64::from_polar(1.0, -(ky[r] * shift_px));
        for (z, src) in row.iter_mut().zip(f_moved.data().row(r)) {
            *z = src * ramp;
        }
    }
    KSpaceGrid::new(out)
}

/// Corrupts an image with a rigid-motion event.
pub fn simulate_rigid(clean: &Image, params: &RigidMotionParams) -> Result<Image> {
    let grid = rigid_kspace(clean, params)?;
    Image::from_field_clamped(&magnitude(&idft2(&grid)))
}

/// The corrupted spectrum of a respiratory event, before magnitude/clamp.
pub fn respiratory_kspace(clean: &Image, params: &RespiratoryParams) -> Result<KSpaceGrid> {
    params.validate()?;
    let shift_px = params.delta_k / params.pixel_spacing_cm;
    let (m, n) = (params.period_m, params.phase_n);
    perturb_phase(
        &dft2(clean),
        |ky| ky * shift_px * (m * ky + n).sin(),
        params.k0,
    )
}

/// Corrupts an image with a respiratory (periodic) motion event.
pub fn simulate_respiratory(clean: &Image, params: &RespiratoryParams) -> Result<Image> {
    let grid = respiratory_kspace(clean, params)?;
    Image::from_field_clamped(&magnitude(&idft2(&grid)))
}

/// Rotates a raster about its center by `deg` degrees, bilinear sampling,
/// zero outside the source bounds.
pub fn rotate_bilinear(src: &Array2<f64>, deg: f64) -> Array2<f64> {
    let (h, w) = src.dim();
    let (cy, cx) = ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0);
    let theta = deg.to_radians();
    let (sin_t, cos_t) = theta.sin_cos();
    Array2::from_shape_fn((h, w), |(r, c)| {
        // Inverse map: where in the source does this output pixel come from?
        let dy = r as f64 - cy;
        let dx = c as f64 - cx;
        let sy = cy + (sin_t * dx + cos_t * dy);
        let sx = cx + (cos_t * dx - sin_t * dy);
        sample_bilinear(src, sy, sx)
    })
}

fn sample_bilinear(src: &Array2<f64>, y: f64, x: f64) -> f64 {
    let (h, w) = src.dim();
    let y0 = y.floor();
    let x0 = x.floor();
    let fy = y - y0;
    let fx = x - x0;
    let at = |yy: f64, xx: f64| -> f64 {
        if yy < 0.0 || xx < 0.0 || yy >= h as f64 || xx >= w as f64 {
            0.0
        } else {
            src[[yy as usize, xx as usize]]
        }
    };
    let v00 = at(y0, x0);
    let v01 = at(y0, x0 + 1.0);
    let v10 = at(y0 + 1.0, x0);
    let v11 = at(y0 + 1.0, x0 + 1.0);
    v00 * (1.0 - fy) * (1.0 - fx) + v01 * (1.0 - fy) * fx + v10 * fy * (1.0 - fx) + v11 * fy * fx
}
