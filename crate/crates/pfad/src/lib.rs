//! Simulation and removal of MRI motion artifacts.
//!
//! The crate has two halves that meet in k-space:
//!
//! * **Simulation** — motion corrupts an acquisition by perturbing the
//!   phase of high-frequency k-space lines ([`sim`]), with synthetic
//!   phantoms ([`phantom`]) as a self-contained image source.
//! * **Purification** — a reverse diffusion walk ([`schedule`],
//!   [`denoiser`], [`toy`]) steered back toward the corrupted input through
//!   alternating checkerboard masks in the pixel and frequency domains
//!   ([`purify`]), so that clean structure is kept while the artifact is
//!   regenerated away.
//!
//! [`metrics`] and [`stats`] quantify the result; [`config`], [`manifest`],
//! [`imageio`], [`report`] and [`cli`] wrap everything into reproducible
//! batch runs. Start with the `examples/` directory for runnable tours of
//! each capability.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod denoiser;
pub mod error;
pub mod filter;
pub mod image;
pub mod imageio;
pub mod kspace;
pub mod manifest;
pub mod mask;
pub mod metrics;
pub mod noise;
pub mod phantom;
pub mod purify;
pub mod report;
pub mod schedule;
pub mod sim;
pub mod stats;
pub mod toy;
pub mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use config::{parse_config_text, Profile, RunConfig, SimKind};
pub use denoiser::{reverse_step, Denoiser, OracleDenoiser};
pub use error::{PfadError, Result};
pub use filter::{apply_filter, make_filter, FilterKind, FilterPair, FrequencyFilter};
pub use image::{Field, Image};
pub use imageio::{
    list_images, load_image, load_pfim, load_png16, png16_quantize, save_pfim, save_png16,
};
pub use kspace::{axis_frequencies, dft2, dft2_field, idft2, magnitude, ComplexField, KSpaceGrid};
pub use manifest::{DatasetManifest, ManifestEntry, SimEvent, MANIFEST_VERSION};
pub use mask::{checkerboard, gamma, mask_weight, MaskState};
pub use metrics::{gmsd, mean_report, metric_report, psnr, ssim, MetricReport, PSNR_CAP_DB};
pub use phantom::{generate_phantom, PhantomSpec};
pub use purify::{
    freq_reorganize, freq_reorganize_kspace, pixel_reorganize, purify, purify_with, BranchMode,
    MaskMode, PurifyConfig, PurifyTrace, TraceRecord,
};
pub use report::{
    EvaluationReport, MetricRow, PurifyReport, PurifyRow, UTestRow, REPORT_VERSION,
};
pub use schedule::{forward_sample, make_schedule, NoiseSchedule};
pub use sim::{
    perturb_phase, respiratory_kspace, rigid_kspace, simulate_respiratory, simulate_rigid,
    RespiratoryParams, RigidMotionParams,
};
pub use stats::{mann_whitney_u, UTestResult};
pub use toy::{ToyConfig, ToyDenoiser};
pub use train::{train_toy_denoiser, TrainConfig, TrainReport};
