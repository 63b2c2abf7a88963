//! Full-reference image quality metrics.
//!
//! * [`psnr`] — peak signal-to-noise ratio against a fixed peak of 1.0,
//!   capped at 99.0 dB for (near-)identical images so corpus means stay
//!   finite;
//! * [`ssim`] — single-scale structural similarity, 11x11 Gaussian window
//!   (sigma 1.5), K1 = 0.01 / K2 = 0.03, dynamic range 1.0, averaged over
//!   fully valid window positions;
//! * [`gmsd`] — gradient-magnitude similarity deviation: 2x2 mean
//!   downsample, 3x3 Prewitt gradients, then the population standard
//!   deviation of the similarity map. 0 means identical.
//!
//! All three are deterministic pure functions of their inputs.

use ndarray::Array2;

use crate::error::{PfadError, Result};
use crate::image::Image;

/// PSNR/SSIM/GMSD of one comparison (or the mean over a corpus).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub psnr: f64,
    pub ssim: f64,
    pub gmsd: f64,
}

impl MetricReport {
    /// Single aggregate for ranking configurations: rewards PSNR and SSIM,
    /// penalizes GMSD (the only lower-is-better metric here).
    pub fn combined_total(&self) -> f64 {
        self.psnr + self.ssim - self.gmsd
    }
}

/// Computes all three metrics at once.
pub fn metric_report(x: &Image, reference: &Image) -> Result<MetricReport> {
    Ok(MetricReport {
        psnr: psnr(x, reference)?,
        ssim: ssim(x, reference)?,
        gmsd: gmsd(x, reference)?,
    })
}

/// Arithmetic mean of per-image reports. Empty input is a caller bug.
pub fn mean_report(reports: &[MetricReport]) -> MetricReport {
    assert!(!reports.is_empty(), "mean of zero reports");
    let n = reports.len() as f64;
    MetricReport {
        psnr: reports.iter().map(|r| r.psnr).sum::<f64>() / n,
        ssim: reports.iter().map(|r| r.ssim).sum::<f64>() / n,
        gmsd: reports.iter().map(|r| r.gmsd).sum::<f64>() / n,
    }
}

/// MSE below this threshold reports the cap instead of a diverging log.
const PSNR_MSE_FLOOR: f64 = 1e-10;
/// Stand-in for +inf dB on identical images.
pub const PSNR_CAP_DB: f64 = 99.0;

/// Peak signal-to-noise ratio in dB, peak fixed at 1.0.
pub fn psnr(x: &Image, reference: &Image) -> Result<f64> {
    check_shapes(x, reference)?;
    let n = (x.height() * x.width()) as f64;
    let mse = x
        .data()
        .iter()
        .zip(reference.data().iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    if mse < PSNR_MSE_FLOOR {
        return Ok(PSNR_CAP_DB);
    }
    Ok(10.0 * (1.0 / mse).log10())
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// Mean local structural similarity over all fully valid window positions.
pub fn ssim(x: &Image, reference: &Image) -> Result<f64> {
    check_shapes(x, reference)?;
    let (h, w) = x.dims();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(PfadError::InvalidParam {
            name: "image",
            reason: format!("{h}x{w} smaller than the {SSIM_WINDOW}-pixel SSIM window"),
        });
    }
    let kernel = gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA);
    let a = x.data();
    let b = reference.data();

    let mu_a = conv_separable_valid(a, &kernel);
    let mu_b = conv_separable_valid(b, &kernel);
    let raw_aa = conv_separable_valid(&(a * a), &kernel);
    let raw_bb = conv_separable_valid(&(b * b), &kernel);
    let raw_ab = conv_separable_valid(&(a * b), &kernel);

    let c1 = SSIM_K1 * SSIM_K1; // dynamic range L = 1
    let c2 = SSIM_K2 * SSIM_K2;
    let mut sum = 0.0;
    for (idx, ma) in mu_a.indexed_iter() {
        let mb = mu_b[idx];
        let var_a = raw_aa[idx] - ma * ma;
        let var_b = raw_bb[idx] - mb * mb;
        let cov = raw_ab[idx] - ma * mb;
        let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
        let den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
        sum += num / den;
    }
    Ok(sum / mu_a.len() as f64)
}

/// Stability constant of the gradient-similarity map; the customary value
/// 170 for 8-bit data, rescaled to the unit dynamic range used here
/// (gradients scale linearly with intensity, the constant with its square).
const GMS_C: f64 = 170.0 / (255.0 * 255.0);

/// Gradient-magnitude similarity deviation; lower is better, 0 = identical.
pub fn gmsd(x: &Image, reference: &Image) -> Result<f64> {
    check_shapes(x, reference)?;
    let a = downsample2(x.data());
    let b = downsample2(reference.data());

    let ga = gradient_magnitude(&a);
    let gb = gradient_magnitude(&b);

    let n = ga.len() as f64;
    let mut gms = Vec::with_capacity(ga.len());
    for (va, vb) in ga.iter().zip(gb.iter()) {
        gms.push((2.0 * va * vb + GMS_C) / (va * va + vb * vb + GMS_C));
    }
    let mean = gms.iter().sum::<f64>() / n;
    let var = gms.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / n;
    Ok(var.sqrt())
}

fn check_shapes(x: &Image, reference: &Image) -> Result<()> {
    if x.dims() != reference.dims() {
        return Err(PfadError::ShapeMismatch {
            expected: reference.dims(),
            got: x.dims(),
        });
    }
    Ok(())
}

/// Normalized 1-D Gaussian taps.
fn gaussian_kernel(len: usize, sigma: f64) -> Vec<f64> {
    let center = (len - 1) as f64 / 2.0;
    let mut k: Vec<f64> = (0..len)
        .map(|i| {
            let d = i as f64 - center;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Separable 2-D convolution keeping only fully valid positions.
fn conv_separable_valid(src: &Array2<f64>, kernel: &[f64]) -> Array2<f64> {
    let (h, w) = src.dim();
    let k = kernel.len();
    let mut horiz = Array2::zeros((h, w - k + 1));
    for r in 0..h {
        for c in 0..w - k + 1 {
            let mut acc = 0.0;
            for (i, kv) in kernel.iter().enumerate() {
                acc += src[[r, c + i]] * kv;
            }
            horiz[[r, c]] = acc;
        }
    }
    let mut out = Array2::zeros((h - k + 1, w - k + 1));
    for r in 0..h - k + 1 {
        for c in 0..w - k + 1 {
            let mut acc = 0.0;
            for (i, kv) in kernel.iter().enumerate() {
                acc += horiz[[r + i, c]] * kv;
            }
            out[[r, c]] = acc;
        }
    }
    out
}

/// 2x2 block means (blocks clipped at the bottom/right edge for odd sizes).
fn downsample2(src: &Array2<f64>) -> Array2<f64> {
    let (h, w) = src.dim();
    let (oh, ow) = (h.div_ceil(2), w.div_ceil(2));
    Array2::from_shape_fn((oh, ow), |(r, c)| {
        let r1 = (2 * r + 2).min(h);
        let c1 = (2 * c + 2).min(w);
        let mut acc = 0.0;
        let mut n = 0.0;
        for rr in 2 * r..r1 {
            for cc in 2 * c..c1 {
                acc += src[[rr, cc]];
                n += 1.0;
            }
        }
        acc / n
    })
}

/// Prewitt gradient magnitude with zero padding.
fn gradient_magnitude(src: &Array2<f64>) -> Array2<f64> {
    let (h, w) = src.dim();
    let third = 1.0 / 3.0;
    let at = |r: isize, c: isize| -> f64 {
        if r < 0 || c < 0 || r >= h as isize || c >= w as isize {
            0.0
        } else {
            src[[r as usize, c as usize]]
        }
    };
    Array2::from_shape_fn((h, w), |(r, c)| {
        let (r, c) = (r as isize, c as isize);
        let mut gx = 0.0;
        let mut gy = 0.0;
        for d in -1..=1 {
            gx += (at(r + d, c - 1) - at(r + d, c + 1)) * third;
            gy += (at(r - 1, c + d) - at(r + 1, c + d)) * third;
        }
        (gx * gx + gy * gy).sqrt()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Field;
    use crate::phantom::{generate_phantom, PhantomSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn phantom(seed: u64) -> Image {
        generate_phantom(&PhantomSpec {
            size: 64,
            ellipse_count: 4,
            intensity_range: (0.05, 0.95),
            seed,
        })
        .unwrap()
    }

    #[test]
    fn psnr_identical_hits_the_cap() {
        let img = phantom(1);
        assert_eq!(psnr(&img, &img).unwrap(), PSNR_CAP_DB);
    }

    #[test]
    fn psnr_uniform_offset() {
        let reference = Image::from_fn(16, 16, |r, c| (r + c) as f64 / 60.0).unwrap();
        let shifted = Image::new(reference.data() + 0.1).unwrap();
        let db = psnr(&shifted, &reference).unwrap();
        assert!((db - 20.0).abs() < 1e-9, "got {db}");
    }

    #[test]
    fn psnr_half_amplitude_checkerboard() {
        let x = Image::from_fn(16, 16, |r, c| if (r + c) % 2 == 0 { 0.25 } else { 0.75 }).unwrap();
        let y = Image::from_fn(16, 16, |r, c| if (r + c) % 2 == 0 { 0.75 } else { 0.25 }).unwrap();
        let db = psnr(&x, &y).unwrap();
        assert!((db - 10.0 * 4.0_f64.log10()).abs() < 1e-12, "got {db}");
        assert!((db - 6.0206).abs() < 1e-3);
    }

    #[test]
    fn psnr_is_shift_invariant() {
        let reference = phantom(2);
        let x = Image::new(reference.data() * 0.8).unwrap(); // distinct but close
        let base = psnr(&x, &reference).unwrap();
        let c = 0.04;
        let shifted = psnr(
            &Image::new(x.data() + c).unwrap(),
            &Image::new(reference.data() + c).unwrap(),
        )
        .unwrap();
        assert!((base - shifted).abs() < 1e-9);
    }

    #[test]
    fn ssim_identical_is_one() {
        let img = phantom(3);
        assert_eq!(ssim(&img, &img).unwrap(), 1.0);
    }

    #[test]
    fn ssim_inverted_image_scores_low() {
        let img = phantom(4);
        let inverted = Image::new(img.data().mapv(|v| 1.0 - v)).unwrap();
        let s = ssim(&inverted, &img).unwrap();
        assert!(s < 0.3, "inverted phantom scored {s}");
    }

    #[test]
    fn ssim_decreases_with_noise_level() {
        let img = phantom(5);
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let noise: Field =
            Array2::from_shape_fn((64, 64), |_| StandardNormal.sample(&mut rng));
        let mut scores = Vec::new();
        for sigma in [0.05, 0.1, 0.2] {
            let noisy = Image::from_field_clamped(&(img.data() + &(&noise * sigma))).unwrap();
            let s = ssim(&noisy, &img).unwrap();
            assert!(s > 0.0 && s < 1.0);
            scores.push(s);
        }
        assert!(scores[0] > scores[1] && scores[1] > scores[2], "{scores:?}");
    }

    #[test]
    fn ssim_stays_in_bounds() {
        let img = phantom(7);
        let adversaries = [
            Image::zeros(64, 64).unwrap(),
            Image::from_fn(64, 64, |_, _| 1.0).unwrap(),
            Image::from_fn(64, 64, |r, _| (r % 2) as f64).unwrap(),
            phantom(8),
        ];
        for other in &adversaries {
            let s = ssim(other, &img).unwrap();
            assert!((-1.0..=1.0).contains(&s), "out of bounds: {s}");
            assert!(s < 1.0 - 1e-9, "non-identical pair scored as identical");
        }
    }

    #[test]
    fn ssim_rejects_small_images() {
        let tiny = Image::zeros(10, 32).unwrap();
        assert!(ssim(&tiny, &tiny).is_err());
    }

    #[test]
    fn gmsd_identical_is_zero() {
        let img = phantom(9);
        assert_eq!(gmsd(&img, &img).unwrap(), 0.0);
    }

    #[test]
    fn gmsd_detects_blur_and_is_symmetric() {
        let img = phantom(10);
        // Cheap 3x3 box blur as the degradation.
        let (h, w) = img.dims();
        let blurred = Image::from_fn(h, w, |r, c| {
            let mut acc = 0.0;
            let mut n = 0.0;
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let rr = r as i64 + dr;
                    let cc = c as i64 + dc;
                    if rr >= 0 && cc >= 0 && rr < h as i64 && cc < w as i64 {
                        acc += img.data()[[rr as usize, cc as usize]];
                        n += 1.0;
                    }
                }
            }
            acc / n
        })
        .unwrap();
        let fwd = gmsd(&blurred, &img).unwrap();
        let rev = gmsd(&img, &blurred).unwrap();
        assert!(fwd > 0.0);
        assert_eq!(fwd, rev);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = Image::zeros(16, 16).unwrap();
        let b = Image::zeros(16, 17).unwrap();
        assert!(matches!(psnr(&a, &b), Err(PfadError::ShapeMismatch { .. })));
        assert!(matches!(ssim(&a, &b), Err(PfadError::ShapeMismatch { .. })));
        assert!(matches!(gmsd(&a, &b), Err(PfadError::ShapeMismatch { .. })));
    }

    #[test]
    fn combined_total_mixes_signs() {
        let r = MetricReport {
            psnr: 30.0,
            ssim: 0.9,
            gmsd: 0.1,
        };
        assert!((r.combined_total() - 30.8).abs() < 1e-12);
    }

    #[test]
    fn mean_report_averages_fields() {
        let a = MetricReport {
            psnr: 20.0,
            ssim: 0.5,
            gmsd: 0.2,
        };
        let b = MetricReport {
            psnr: 30.0,
            ssim: 0.9,
            gmsd: 0.0,
        };
        let m = mean_report(&[a, b]);
        assert!((m.psnr - 25.0).abs() < 1e-12);
        assert!((m.ssim - 0.7).abs() < 1e-12);
        assert!((m.gmsd - 0.1).abs() < 1e-12);
    }
}
