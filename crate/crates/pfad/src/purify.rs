//! The dual-domain purification loop.
//!
//! Starting from pure noise, a reverse diffusion walk regenerates the
//! image while two reorganization moves pull it toward the corrupted
//! input `x_ori` wherever that input is trustworthy:
//!
//! * **frequency branch** — the low band of the spectrum (below `cutoff`
//!   along the phase axis) is always taken from `x_ori`; in the high band,
//!   a weighted checkerboard softly swaps input and generated
//!   coefficients;
//! * **pixel branch** — the same checkerboard blends the generator's
//!   latent with a forward-noised copy of `x_ori` at the matching step.
//!
//! The two branches are mixed by `gamma_t` and fed back as the next
//! latent. The checkerboard's parity flips every step, so consecutive
//! steps guide complementary halves of the image, and its weight
//! `omega_t` fades as the walk approaches the clean end.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::denoiser::{reverse_step, Denoiser};
use crate::error::{PfadError, Result};
use crate::filter::FilterPair;
use crate::image::{Field, Image};
use crate::kspace::{dft2, dft2_field, idft2, magnitude, KSpaceGrid};
use crate::mask::{checkerboard, gamma, mask_weight};
use crate::metrics::psnr;
use crate::noise::normal_field;
use crate::schedule::{forward_sample, NoiseSchedule};

/// Which domain branches contribute to the per-step blend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchMode {
    /// `gamma_t` from the balance formula (the full method).
    Balanced,
    /// Force `gamma_t = 1`: frequency-domain reorganization only.
    FrequencyOnly,
    /// Force `gamma_t = 0`: pixel-domain reorganization only.
    PixelOnly,
}

/// How the per-step guidance mask is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskMode {
    /// Alternating checkerboard scaled by `omega_t` (the full method).
    Checkerboard,
    /// Checkerboard without the `omega_t` scaling (ablation arm).
    CheckerboardUnweighted,
    /// Guidance everywhere, unweighted: the mask is all ones.
    FullGuidance,
    /// No guidance: the mask is all zeros, the walk free-runs.
    NoGuidance,
}

/// Purification hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurifyConfig {
    /// Reverse steps; must match the schedule's `T`.
    pub t_steps: usize,
    /// Dual-domain balance `a` in `[0, 1]`.
    pub balance_a: f64,
    /// Low/high band split along the phase axis, radians in `(0, pi)`.
    pub cutoff: f64,
    /// Checkerboard cell size in pixels.
    pub grid_size: usize,
    /// Phase-encode axis: 0 = rows, 1 = columns.
    pub phase_axis: usize,
    /// Base RNG seed; batch callers add a per-image stream on top.
    pub seed: u64,
    pub branch_mode: BranchMode,
    pub mask_mode: MaskMode,
}

impl Default for PurifyConfig {
    /// Defaults matching the full-scale `paper` profile: `T = 1000`,
    /// `a = 0.7`, cutoff `pi / 10`, grid 16.
    fn default() -> Self {
        Self {
            t_steps: 1000,
            balance_a: 0.7,
            cutoff: std::f64::consts::PI / 10.0,
            grid_size: 16,
            phase_axis: 0,
            seed: 0,
            branch_mode: BranchMode::Balanced,
            mask_mode: MaskMode::Checkerboard,
        }
    }
}

impl PurifyConfig {
    /// Desk-scale variant: 100 steps (pair with
    /// [`NoiseSchedule::desk_profile`]), grid 16 on 64x64 images.
    pub fn desk() -> Self {
        Self {
            t_steps: 100,
            ..Self::default()
        }
    }

    fn validate(&self, dims: (usize, usize)) -> Result<()> {
        if self.t_steps < 1 {
            return Err(PfadError::InvalidParam {
                name: "t_steps",
                reason: "must be >= 1".into(),
            });
        }
        if !self.balance_a.is_finite() || !(0.0..=1.0).contains(&self.balance_a) {
            return Err(PfadError::InvalidParam {
                name: "balance_a",
                reason: format!("{} not in [0, 1]", self.balance_a),
            });
        }
        if !self.cutoff.is_finite()
            || self.cutoff <= 0.0
            || self.cutoff >= std::f64::consts::PI
        {
            return Err(PfadError::InvalidParam {
                name: "cutoff",
                reason: format!("{} not in (0, pi)", self.cutoff),
            });
        }
        let min_dim = dims.0.min(dims.1);
        if self.grid_size < 1 || self.grid_size > min_dim {
            return Err(PfadError::InvalidParam {
                name: "grid_size",
                reason: format!("{} not in 1..={min_dim}", self.grid_size),
            });
        }
        if self.phase_axis > 1 {
            return Err(PfadError::InvalidParam {
                name: "phase_axis",
                reason: format!("{} is not a 2-D axis", self.phase_axis),
            });
        }
        Ok(())
    }
}

/// One step of a purification run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    pub omega: f64,
    pub gamma: f64,
    /// PSNR of the clamped intermediate against the reference, when one
    /// was supplied.
    pub psnr: Option<f64>,
}

/// Per-step log of a run; one record per reverse step, newest last.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PurifyTrace {
    pub records: Vec<TraceRecord>,
}

impl PurifyTrace {
    /// Tab-separated export: header line, then one record per line with an
    /// empty last column when no reference PSNR was computed.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("t\tomega\tgamma\tpsnr\n");
        for r in &self.records {
            let psnr = r.psnr.map(|p| format!("{p:.4}")).unwrap_or_default();
            out.push_str(&format!(
                "{}\t{:.6}\t{:.6}\t{}\n",
                r.t, r.omega, r.gamma, psnr
            ));
        }
        out
    }
}

/// Frequency-domain reorganization, returned as the recombined spectrum
/// (before the magnitude step). The low band is copied from `f_ori` bit
/// for bit; in the high band the weighted mask blends input and generated
/// coefficients positionally.
pub fn freq_reorganize_kspace(
    f_ori: &KSpaceGrid,
    x_gen: &Field,
    mask: &Field,
    filters: &FilterPair,
) -> Result<KSpaceGrid> {
    let dims = f_ori.dims();
    if x_gen.dim() != dims {
        return Err(PfadError::ShapeMismatch {
            expected: dims,
            got: x_gen.dim(),
        });
    }
    if mask.dim() != dims {
        return Err(PfadError::ShapeMismatch {
            expected: dims,
            got: mask.dim(),
        });
    }
    if mask.iter().any(|&m| !(0.0..=1.0).contains(&m)) {
        return Err(PfadError::InvalidParam {
            name: "mask",
            reason: "weighted mask values must lie in [0, 1]".into(),
        });
    }
    let axis = filters.low.axis();
    if filters.high.axis() != axis
        || filters.high.cutoff() != filters.low.cutoff()
        || filters.high.kind() == filters.low.kind()
    {
        return Err(PfadError::InvalidParam {
            name: "filters",
            reason: "low/high pair must share cutoff and axis".into(),
        });
    }

    let f_gen = dft2_field(x_gen);
    let low_pass = filters.low.axis_mask(if axis == 0 { dims.0 } else { dims.1 });
    let mut out = f_ori.data().clone();
    for ((r, c), z) in out.indexed_iter_mut() {
        let line = if axis == 0 { r } else { c };
        if low_pass[line] {
            continue; // low band: already the original coefficient
        }
        let m = mask[[r, c]];
        *z = *z * m + f_gen.data()[[r, c]] * (1.0 - m);
    }
    KSpaceGrid::new(out)
}

/// Frequency-domain reorganization as an image-domain field:
/// `|idft2(low(f_ori) + high(f_ori) * M + high(f_gen) * (1 - M))|`.
pub fn freq_reorganize(
    f_ori: &KSpaceGrid,
    x_gen: &Field,
    mask: &Field,
    filters: &FilterPair,
) -> Result<Field> {
    let combined = freq_reorganize_kspace(f_ori, x_gen, mask, filters)?;
    Ok(magnitude(&idft2(&combined)))
}

/// Pixel-domain reorganization: per-pixel convex blend
/// `x_forward * M + x_gen * (1 - M)` of two latents.
pub fn pixel_reorganize(x_forward: &Field, x_gen: &Field, mask: &Field) -> Result<Field> {
    if x_gen.dim() != x_forward.dim() {
        return Err(PfadError::ShapeMismatch {
            expected: x_forward.dim(),
            got: x_gen.dim(),
        });
    }
    if mask.dim() != x_forward.dim() {
        return Err(PfadError::ShapeMismatch {
            expected: x_forward.dim(),
            got: mask.dim(),
        });
    }
    Ok(x_forward * mask + x_gen * &(1.0 - mask))
}

/// Purifies one image. Equivalent to [`purify_with`] with no reference and
/// RNG stream 0.
pub fn purify(
    x_ori: &Image,
    config: &PurifyConfig,
    schedule: &NoiseSchedule,
    denoiser: &dyn Denoiser,
) -> Result<(Image, PurifyTrace)> {
    purify_with(x_ori, config, schedule, denoiser, None, 0)
}

/// Purifies one image with full control over tracing and RNG streams.
///
/// `reference` (usually the clean ground truth, when known) adds a PSNR
/// column to the trace. `rng_stream` separates the noise sequences of
/// images processed under one seed; run `i` of a batch passes stream `i`.
///
/// Draw order per run: the initial latent, then per step the reverse-step
/// noise (skipped at `t = 1`, where the step is deterministic) followed by
/// the forward-sample noise. Fixed seed and stream give bit-identical
/// output and trace.
pub fn purify_with(
    x_ori: &Image,
    config: &PurifyConfig,
    schedule: &NoiseSchedule,
    denoiser: &dyn Denoiser,
    reference: Option<&Image>,
    rng_stream: u64,
) -> Result<(Image, PurifyTrace)> {
    let (h, w) = x_ori.dims();
    config.validate((h, w))?;
    if config.t_steps != schedule.t_max() {
        return Err(PfadError::InvalidParam {
            name: "t_steps",
            reason: format!(
                "config says {} steps but the schedule has {}",
                config.t_steps,
                schedule.t_max()
            ),
        });
    }
    if let Some(r) = reference {
        if r.dims() != (h, w) {
            return Err(PfadError::ShapeMismatch {
                expected: (h, w),
                got: r.dims(),
            });
        }
    }

    let filters = FilterPair::complementary(config.cutoff, config.phase_axis)?;
    let f_ori = dft2(x_ori);
    let t_max = config.t_steps;

    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    rng.set_stream(rng_stream);

    let mut x = normal_field(h, w, &mut rng);
    let mut trace = PurifyTrace::default();
    let zero = Field::zeros((h, w));

    for t in (1..=t_max).rev() {
        let rev_noise = if t > 1 {
            normal_field(h, w, &mut rng)
        } else {
            zero.clone()
        };
        let x_gen = reverse_step(schedule, denoiser, &x, t, &rev_noise)?;

        let omega = mask_weight(schedule, t)?;
        let weighted_mask = match config.mask_mode {
            MaskMode::Checkerboard => {
                checkerboard(h, w, config.grid_size, (t % 2) as u8) * omega
            }
            MaskMode::CheckerboardUnweighted => {
                checkerboard(h, w, config.grid_size, (t % 2) as u8)
            }
            MaskMode::FullGuidance => Field::ones((h, w)),
            MaskMode::NoGuidance => Field::zeros((h, w)),
        };

        let x_freq = freq_reorganize(&f_ori, &x_gen, &weighted_mask, &filters)?;

        let fwd_noise = normal_field(h, w, &mut rng);
        let x_forward = forward_sample(schedule, x_ori, t, &fwd_noise)?;
        let x_pixel = pixel_reorganize(&x_forward, &x_gen, &weighted_mask)?;

        let g = match config.branch_mode {
            BranchMode::Balanced => gamma(t, t_max, config.balance_a),
            BranchMode::FrequencyOnly => 1.0,
            BranchMode::PixelOnly => 0.0,
        };
        x = &x_freq * g + &x_pixel * (1.0 - g);

        if x.iter().any(|v| !v.is_finite()) {
            return Err(PfadError::NonFiniteLatent { step: t });
        }
        let step_psnr = match reference {
            Some(r) => Some(psnr(&Image::from_field_clamped(&x)?, r)?),
            None => None,
        };
        trace.records.push(TraceRecord {
            t,
            omega,
            gamma: g,
            psnr: step_psnr,
        });
    }

    Ok((Image::from_field_clamped(&x)?, trace))
}
