//! Centered, unitary 2-D discrete Fourier transform.
//!
//! Conventions used everywhere in this crate:
//!
//! * both directions scale by `1 / sqrt(H * W)`, so energy is preserved
//!   (`sum |F|^2 == sum |x|^2`) and a round trip is the identity;
//! * the zero-frequency (DC) sample sits at `(H / 2, W / 2)` (floor), i.e.
//!   spectra are stored fft-shifted;
//! * the angular frequency of centered row/column index `i` along an axis
//!   of length `n` is `2 * pi * (i - n / 2) / n`, covering `[-pi, pi)`.

use std::sync::{Arc, LazyLock, Mutex};

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{PfadError, Result};
use crate::image::{Field, Image};

/// Complex-valued raster, e.g. the output of [`idft2`].
pub type ComplexField = Array2<Complex64>;

/// A centered 2-D spectrum.
///
/// Wraps the complex samples of one image; DC at `(H / 2, W / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KSpaceGrid {
    data: Array2<Complex64>,
}

impl KSpaceGrid {
    /// Wraps a spectrum, rejecting empty shapes.
    pub fn new(data: Array2<Complex64>) -> Result<Self> {
        let (h, w) = data.dim();
        if h == 0 || w == 0 {
            return Err(PfadError::InvalidParam {
                name: "kspace",
                reason: format!("empty shape {h}x{w}"),
            });
        }
        Ok(Self { data })
    }

    pub fn height(&self) -> usize {
        self.data.nrows()
    }

    pub fn width(&self) -> usize {
        self.data.ncols()
    }

    /// `(height, width)`.
    pub fn dims(&self) -> (usize, usize) {
        self.data.dim()
    }

    pub fn data(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.data
    }

    /// Total spectral energy `sum |F|^2`. Equal to the image-domain energy
    /// under the unitary scaling.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Angular frequency of each centered index along an axis of length `len`:
/// `k(i) = 2 * pi * (i - len / 2) / len`.
///
/// The values are monotonically increasing over `[-pi, pi)` and hit exactly
/// `0.0` at `len / 2` (floor), where DC lives after centering.
pub fn axis_frequencies(len: usize) -> Vec<f64> {
    let half = (len / 2) as f64;
    (0..len)
        .map(|i| 2.0 * std::f64::consts::PI * (i as f64 - half) / len as f64)
        .collect()
}

/// Forward transform of an image.
pub fn dft2(image: &Image) -> KSpaceGrid {
    dft2_field(image.data())
}

/// Forward transform of an unconstrained real field (used for diffusion
/// latents, which stray outside `[0, 1]`).
pub fn dft2_field(field: &Field) -> KSpaceGrid {
    let (h, w) = field.dim();
    let mut buf: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2_in_place(&mut buf, h, w, FftDirection::Forward);
    let scale = 1.0 / ((h * w) as f64).sqrt();
    for z in &mut buf {
        *z *= scale;
    }
    KSpaceGrid {
        data: shift2(&buf, h, w, false),
    }
}

/// Inverse transform. Returns the full complex raster; callers that want a
/// real image take [`magnitude`] (and clamp only when emitting).
pub fn idft2(grid: &KSpaceGrid) -> ComplexField {
    let (h, w) = grid.dims();
    let shifted = shift2(grid.data().as_slice().expect("grid is contiguous"), h, w, true);
    let mut buf: Vec<Complex64> = shifted.into_raw_vec();
    fft2_in_place(&mut buf, h, w, FftDirection::Inverse);
    let scale = 1.0 / ((h * w) as f64).sqrt();
    for z in &mut buf {
        *z *= scale;
    }
    Array2::from_shape_vec((h, w), buf).expect("shape preserved")
}

/// Pointwise complex modulus.
pub fn magnitude(field: &ComplexField) -> Field {
    field.mapv(Complex64::norm)
}

// ---------------------------------------------------------------------------
// FFT plumbing
// ---------------------------------------------------------------------------

static PLANNER: LazyLock<Mutex<FftPlanner<f64>>> =
    LazyLock::new(|| Mutex::new(FftPlanner::new()));

/// Fetches a cached plan for length `len`. rustfft memoizes internally, so
/// repeated transforms of the same size share twiddle tables.
fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER
        .lock()
        .expect("fft planner lock poisoned")
        .plan_fft(len, direction)
}

/// Unnormalized 2-D FFT over a row-major `h x w` buffer.
fn fft2_in_place(buf: &mut [Complex64], h: usize, w: usize, direction: FftDirection) {
    // Rows first: the buffer is already a concatenation of h rows.
    plan(w, direction).process(buf);

    // Columns: transpose, batch-transform, transpose back.
    let mut tr = vec![Complex64::default(); buf.len()];
    transpose(buf, &mut tr, h, w);
    plan(h, direction).process(&mut tr);
    transpose(&tr, buf, w, h);
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

/// fftshift (`inverse == false`) or ifftshift (`inverse == true`) of a
/// row-major buffer. The two differ for odd lengths.
fn shift2(src: &[Complex64], h: usize, w: usize, inverse: bool) -> Array2<Complex64> {
    let (dr, dc) = if inverse {
        (h - h / 2, w - w / 2) // ceil(n / 2): undoes the forward shift
    } else {
        (h / 2, w / 2)
    };
    let mut out = Array2::default((h, w));
    for r in 0..h {
        let rr = (r + dr) % h;
        for c in 0..w {
            let cc = (c + dc) % w;
            out[[rr, cc]] = src[r * w + c];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    /// Deterministic pseudo-random image for transform tests.
    fn test_image(h: usize, w: usize) -> Image {
        Image::from_fn(h, w, |r, c| {
            let x = (r * w + c) as f64;
            (x * 0.754_877_666).fract() * 0.98 + 0.01
        })
        .unwrap()
    }

    /// Direct O(N^2) evaluation of the centered unitary DFT; the oracle the
    /// fast path must match.
    fn naive_dft2(img: &Image) -> Array2<Complex64> {
        let (h, w) = img.dims();
        let ky = axis_frequencies(h);
        let kx = axis_frequencies(w);
        let scale = 1.0 / ((h * w) as f64).sqrt();
        Array2::from_shape_fn((h, w), |(u, v)| {
            let mut acc = Complex64::default();
            for r in 0..h {
                for c in 0..w {
                    let phase = -(ky[u] * r as f64 + kx[v] * c as f64);
                    acc += img.data()[[r, c]] * Complex64::from_polar(1.0, phase);
                }
            }
            acc * scale
        })
    }

    #[test]
    fn matches_naive_dft_even_and_odd() {
        for (h, w) in [(6, 4), (5, 3), (4, 7)] {
            let img = test_image(h, w);
            let fast = dft2(&img);
            let slow = naive_dft2(&img);
            for (z_fast, z_slow) in fast.data().iter().zip(slow.iter()) {
                assert!(
                    (z_fast - z_slow).norm() < 1e-10,
                    "fast/naive mismatch on {h}x{w}"
                );
            }
        }
    }

    #[test]
    fn round_trip_is_identity() {
        for (h, w) in [(8, 8), (3, 5), (5, 3), (16, 12)] {
            let img = test_image(h, w);
            let back = idft2(&dft2(&img));
            for (z, &v) in back.iter().zip(img.data().iter()) {
                assert!((z.re - v).abs() < 1e-12, "re drift on {h}x{w}");
                assert!(z.im.abs() < 1e-12, "imag residue on {h}x{w}");
            }
        }
    }

    #[test]
    fn energy_is_preserved() {
        let img = test_image(16, 16);
        let pixel_energy: f64 = img.data().iter().map(|v| v * v).sum();
        let spectral_energy = dft2(&img).energy();
        assert!((pixel_energy - spectral_energy).abs() / pixel_energy < 1e-12);
    }

    #[test]
    fn dc_sits_at_center() {
        let img = test_image(8, 6);
        let grid = dft2(&img);
        let mean: f64 = img.data().iter().sum::<f64>() / 48.0;
        // Unitary scaling puts sqrt(H * W) * mean at the DC bin.
        let expected = (48.0f64).sqrt() * mean;
        let dc = grid.data()[[4, 3]];
        assert!((dc.re - expected).abs() < 1e-12);
        assert!(dc.im.abs() < 1e-12);
    }

    #[test]
    fn axis_frequencies_layout() {
        let k = axis_frequencies(256);
        assert_eq!(k[128], 0.0);
        assert!((k[0] + std::f64::consts::PI).abs() < 1e-15);
        assert!(k.windows(2).all(|p| p[1] > p[0]));

        let k_odd = axis_frequencies(5);
        assert_eq!(k_odd[2], 0.0);
        assert!(*k_odd.last().unwrap() < std::f64::consts::PI);
    }

    #[test]
    fn magnitude_of_round_trip_recovers_image() {
        let img = test_image(9, 7);
        let mag = magnitude(&idft2(&dft2(&img)));
        for (m, &v) in mag.iter().zip(img.data().iter()) {
            assert!((m - v).abs() < 1e-12);
        }
    }
}
