//! Run configuration: flat `key = value` files plus command-line
//! overrides.
//!
//! The file format is deliberately plain — one assignment per line, `#`
//! starts a comment, later assignments win. Overrides passed as
//! `--key value` flags are applied after the file and take precedence.
//! Every key has a default documented on the corresponding
//! [`RunConfig`] field; unknown keys are rejected by name before any
//! output is written.
//!
//! The `profile` key switches the *defaults* between a desk scale
//! (64×64 images, 100 diffusion steps) and the published scale (256×256,
//! 1000 steps); explicitly set keys always beat the profile.

use std::collections::BTreeSet;
use std::path::PathBuf;

use crate::error::{PfadError, Result};
use crate::purify::{BranchMode, MaskMode};

/// Default scale for everything not explicitly configured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// 64×64 phantoms, 100-step schedule, fast training budget.
    Desk,
    /// 256×256 images, 1000-step schedule, published hyperparameters.
    Paper,
}

/// Which artifact model the simulator applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimKind {
    Rigid,
    Respiratory,
}

/// Every tunable of the pipeline, fully resolved.
///
/// Defaults below are those of the `desk` profile; where the `paper`
/// profile differs, its value is given in parentheses.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Default scale: `desk` (`paper`). Key `profile`.
    pub profile: Profile,
    /// Base RNG seed for the whole run. Default 0. Key `seed`.
    pub seed: u64,
    /// Worker threads for per-image work; 0 means one per logical core.
    /// Default 0. Key `workers`.
    pub workers: usize,
    /// Directory of input images; when unset, commands that need clean
    /// images generate phantoms instead. Unset by default. Key `input`.
    pub input: Option<PathBuf>,

    /// Phantom side length in pixels. Default 64 (256). Key `size`.
    pub size: usize,
    /// Phantom corpus size. Default 32. Key `count`.
    pub count: usize,
    /// Ellipses per phantom. Default 5. Key `ellipses`.
    pub ellipses: usize,
    /// Darkest phantom intensity. Default 0.05. Key `intensity_min`.
    pub intensity_min: f64,
    /// Brightest phantom intensity. Default 0.95. Key `intensity_max`.
    pub intensity_max: f64,

    /// Diffusion steps `T`. Default 100 (1000). Key `t_steps`.
    pub t_steps: usize,
    /// First noise-schedule beta. Default 1e-3 (1e-4). Key `beta_start`.
    pub beta_start: f64,
    /// Last noise-schedule beta. Default 0.2 (0.02). Key `beta_end`.
    pub beta_end: f64,

    /// Artifact model, `rigid` or `respiratory`. Default `rigid`.
    /// Key `sim_kind`.
    pub sim_kind: SimKind,
    /// Smallest sampled translation/amplitude in cm. Default 2.5
    /// (rigid-range; respiratory corpora typically use 1.1).
    /// Key `delta_min`.
    pub delta_min: f64,
    /// Largest sampled translation/amplitude in cm. Default 3.0.
    /// Key `delta_max`.
    pub delta_max: f64,
    /// Rotation sampled uniformly from `[-rotation_max, rotation_max]`
    /// degrees (rigid only). Default 2.0. Key `rotation_max`.
    pub rotation_max: f64,
    /// Smallest sampled sinusoid period `m` (respiratory only).
    /// Default 0.1. Key `period_min`.
    pub period_min: f64,
    /// Largest sampled sinusoid period `m`. Default 5.0. Key `period_max`.
    pub period_max: f64,
    /// Smallest sampled sinusoid phase `n` in radians. Default 0.
    /// Key `phase_min`.
    pub phase_min: f64,
    /// Largest sampled sinusoid phase `n`, at most 2π. Default π/4.
    /// Key `phase_max`.
    pub phase_max: f64,
    /// Perturbation onset frequency in radians. Default π/10. Key `k0`.
    pub k0: f64,
    /// Pixel pitch for the cm-to-pixel conversion. Default 0.4 (0.07).
    /// Key `pixel_spacing_cm`.
    pub pixel_spacing_cm: f64,

    /// Optimizer steps for training. Default 400. Key `train_steps`.
    pub train_steps: usize,
    /// Training batch size. Default 4. Key `batch_size`.
    pub batch_size: usize,
    /// Adam learning rate. Default 2e-3 (1e-4). Key `lr`.
    pub lr: f64,
    /// Network channel widths, three comma-separated integers.
    /// Default `8,16,32`. Key `widths`.
    pub widths: [usize; 3],
    /// Time-embedding dimension. Default 32. Key `time_dim`.
    pub time_dim: usize,
    /// Held-out evaluation tuples during training. Default 16.
    /// Key `holdout`.
    pub holdout: usize,
    /// Checkpoint path; `train` writes it (default `<out>/denoiser.ckpt`),
    /// `purify` reads it. Unset by default. Key `checkpoint`.
    pub checkpoint: Option<PathBuf>,

    /// Low/high band split in radians. Default π/10. Key `cutoff`.
    pub cutoff: f64,
    /// Checkerboard cell size in pixels. Default 4 (16). Key `grid_size`.
    pub grid_size: usize,
    /// Dual-domain balance constant `a` in [0, 1]. Default 0.7.
    /// Key `balance_a`.
    pub balance_a: f64,
    /// Phase-encode axis, 0 = rows, 1 = columns. Default 0.
    /// Key `phase_axis`.
    pub phase_axis: usize,
    /// Branch selection: `balanced`, `frequency`, or `pixel`.
    /// Default `balanced`. Key `branch_mode`.
    pub branch_mode: BranchMode,
    /// Guidance masking: `checkerboard`, `unweighted`, `full`, or `none`.
    /// Default `checkerboard`. Key `mask_mode`.
    pub mask_mode: MaskMode,
    /// Purify with the test oracle (target = the input) instead of a
    /// checkpoint. Default false. Key `oracle`.
    pub oracle: bool,
    /// Write a per-image purification trace file. Default false.
    /// Key `trace`.
    pub trace: bool,

    /// Candidate directory for `evaluate`. Unset by default.
    /// Key `candidate`.
    pub candidate: Option<PathBuf>,
    /// Reference (ground truth) directory for `evaluate`. Unset by
    /// default. Key `reference`.
    pub reference: Option<PathBuf>,
    /// Second candidate directory; enables the rank-sum comparison.
    /// Unset by default. Key `baseline`.
    pub baseline: Option<PathBuf>,
}

impl RunConfig {
    /// The documented defaults for one profile.
    pub fn defaults(profile: Profile) -> Self {
        let paper = profile == Profile::Paper;
        Self {
            profile,
            seed: 0,
            workers: 0,
            input: None,
            size: if paper { 256 } else { 64 },
            count: 32,
            ellipses: 5,
            intensity_min: 0.05,
            intensity_max: 0.95,
            t_steps: if paper { 1000 } else { 100 },
            beta_start: if paper { 1e-4 } else { 1e-3 },
            beta_end: if paper { 2e-2 } else { 0.2 },
            sim_kind: SimKind::Rigid,
            delta_min: 2.5,
            delta_max: 3.0,
            rotation_max: 2.0,
            period_min: 0.1,
            period_max: 5.0,
            phase_min: 0.0,
            phase_max: std::f64::consts::FRAC_PI_4,
            k0: std::f64::consts::PI / 10.0,
            pixel_spacing_cm: if paper { 0.07 } else { 0.4 },
            train_steps: 400,
            batch_size: 4,
            lr: if paper { 1e-4 } else { 2e-3 },
            widths: [8, 16, 32],
            time_dim: 32,
            holdout: 16,
            checkpoint: None,
            cutoff: std::f64::consts::PI / 10.0,
            grid_size: if paper { 16 } else { 4 },
            balance_a: 0.7,
            phase_axis: 0,
            branch_mode: BranchMode::Balanced,
            mask_mode: MaskMode::Checkerboard,
            oracle: false,
            trace: false,
            candidate: None,
            reference: None,
            baseline: None,
        }
    }

    /// Resolves a config from file assignments and flag overrides, in
    /// that order of precedence (flags win).
    pub fn from_sources(
        file: &[(String, String)],
        flags: &[(String, String)],
    ) -> Result<RunConfig> {
        // The profile decides the defaults, so resolve it first; the
        // last assignment anywhere wins, flags after file.
        let mut profile = Profile::Desk;
        for (k, v) in file.iter().chain(flags) {
            if k == "profile" {
                profile = parse_profile(v)?;
            }
        }
        let mut cfg = RunConfig::defaults(profile);
        for (k, v) in file.iter().chain(flags) {
            cfg.apply(k, v)?;
        }
        cfg.check_ranges()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "profile" => self.profile = parse_profile(value)?,
            "seed" => self.seed = p_u64(key, value)?,
            "workers" => self.workers = p_usize(key, value)?,
            "input" => self.input = Some(PathBuf::from(value)),
            "size" => self.size = p_usize(key, value)?,
            "count" => self.count = p_usize(key, value)?,
            "ellipses" => self.ellipses = p_usize(key, value)?,
            "intensity_min" => self.intensity_min = p_f64(key, value)?,
            "intensity_max" => self.intensity_max = p_f64(key, value)?,
            "t_steps" => self.t_steps = p_usize(key, value)?,
            "beta_start" => self.beta_start = p_f64(key, value)?,
            "beta_end" => self.beta_end = p_f64(key, value)?,
            "sim_kind" => {
                self.sim_kind = match value {
                    "rigid" => SimKind::Rigid,
                    "respiratory" => SimKind::Respiratory,
                    _ => {
                        return Err(bad_value(key, value, "expected rigid or respiratory"));
                    }
                }
            }
            "delta_min" => self.delta_min = p_f64(key, value)?,
            "delta_max" => self.delta_max = p_f64(key, value)?,
            "rotation_max" => self.rotation_max = p_f64(key, value)?,
            "period_min" => self.period_min = p_f64(key, value)?,
            "period_max" => self.period_max = p_f64(key, value)?,
            "phase_min" => self.phase_min = p_f64(key, value)?,
            "phase_max" => self.phase_max = p_f64(key, value)?,
            "k0" => self.k0 = p_f64(key, value)?,
            "pixel_spacing_cm" => self.pixel_spacing_cm = p_f64(key, value)?,
            "train_steps" => self.train_steps = p_usize(key, value)?,
            "batch_size" => self.batch_size = p_usize(key, value)?,
            "lr" => self.lr = p_f64(key, value)?,
            "widths" => self.widths = p_widths(key, value)?,
            "time_dim" => self.time_dim = p_usize(key, value)?,
            "holdout" => self.holdout = p_usize(key, value)?,
            "checkpoint" => self.checkpoint = Some(PathBuf::from(value)),
            "cutoff" => self.cutoff = p_f64(key, value)?,
            "grid_size" => self.grid_size = p_usize(key, value)?,
            "balance_a" => self.balance_a = p_f64(key, value)?,
            "phase_axis" => self.phase_axis = p_usize(key, value)?,
            "branch_mode" => {
                self.branch_mode = match value {
                    "balanced" => BranchMode::Balanced,
                    "frequency" => BranchMode::FrequencyOnly,
                    "pixel" => BranchMode::PixelOnly,
                    _ => {
                        return Err(bad_value(key, value, "expected balanced, frequency or pixel"));
                    }
                }
            }
            "mask_mode" => {
                self.mask_mode = match value {
                    "checkerboard" => MaskMode::Checkerboard,
                    "unweighted" => MaskMode::CheckerboardUnweighted,
                    "full" => MaskMode::FullGuidance,
                    "none" => MaskMode::NoGuidance,
                    _ => {
                        return Err(bad_value(
                            key,
                            value,
                            "expected checkerboard, unweighted, full or none",
                        ));
                    }
                }
            }
            "oracle" => self.oracle = p_bool(key, value)?,
            "trace" => self.trace = p_bool(key, value)?,
            "candidate" => self.candidate = Some(PathBuf::from(value)),
            "reference" => self.reference = Some(PathBuf::from(value)),
            "baseline" => self.baseline = Some(PathBuf::from(value)),
            _ => return Err(PfadError::UnknownConfigKey(key.to_string())),
        }
        Ok(())
    }

    /// Cheap cross-field checks; domain constructors do the deep ones.
    fn check_ranges(&self) -> Result<()> {
        let ordered: [(&str, f64, f64); 3] = [
            ("delta_min/delta_max", self.delta_min, self.delta_max),
            ("period_min/period_max", self.period_min, self.period_max),
            ("phase_min/phase_max", self.phase_min, self.phase_max),
        ];
        for (what, lo, hi) in ordered {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(PfadError::ConfigValue {
                    key: what.to_string(),
                    reason: format!("range [{lo}, {hi}] is empty or non-finite"),
                });
            }
        }
        if !(self.intensity_min.is_finite()
            && self.intensity_max.is_finite()
            && 0.0 <= self.intensity_min
            && self.intensity_min < self.intensity_max
            && self.intensity_max <= 1.0)
        {
            return Err(PfadError::ConfigValue {
                key: "intensity_min/intensity_max".to_string(),
                reason: format!(
                    "need 0 <= {} < {} <= 1",
                    self.intensity_min, self.intensity_max
                ),
            });
        }
        if !self.rotation_max.is_finite() || !(0.0..=90.0).contains(&self.rotation_max) {
            return Err(PfadError::ConfigValue {
                key: "rotation_max".to_string(),
                reason: format!("{} not in [0, 90]", self.rotation_max),
            });
        }
        Ok(())
    }

    /// All keys [`apply`](Self::apply) accepts, for help output.
    pub fn known_keys() -> BTreeSet<&'static str> {
        [
            "profile",
            "seed",
            "workers",
            "input",
            "size",
            "count",
            "ellipses",
            "intensity_min",
            "intensity_max",
            "t_steps",
            "beta_start",
            "beta_end",
            "sim_kind",
            "delta_min",
            "delta_max",
            "rotation_max",
            "period_min",
            "period_max",
            "phase_min",
            "phase_max",
            "k0",
            "pixel_spacing_cm",
            "train_steps",
            "batch_size",
            "lr",
            "widths",
            "time_dim",
            "holdout",
            "checkpoint",
            "cutoff",
            "grid_size",
            "balance_a",
            "phase_axis",
            "branch_mode",
            "mask_mode",
            "oracle",
            "trace",
            "candidate",
            "reference",
            "baseline",
        ]
        .into()
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are
/// skipped. Returns assignments in file order.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let stripped = stripped.trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or(PfadError::ConfigSyntax {
            line,
            reason: "expected `key = value`".to_string(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(PfadError::ConfigSyntax {
                line,
                reason: "empty key".to_string(),
            });
        }
        if value.is_empty() {
            return Err(PfadError::ConfigSyntax {
                line,
                reason: format!("no value for `{key}`"),
            });
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

fn parse_profile(value: &str) -> Result<Profile> {
    match value {
        "desk" => Ok(Profile::Desk),
        "paper" => Ok(Profile::Paper),
        _ => Err(bad_value("profile", value, "expected desk or paper")),
    }
}

fn bad_value(key: &str, value: &str, expected: &str) -> PfadError {
    PfadError::ConfigValue {
        key: key.to_string(),
        reason: format!("`{value}`: {expected}"),
    }
}

fn p_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| bad_value(key, value, "expected a non-negative integer"))
}

fn p_u64(key: &str, value: &str) -> Result<u64> {
    value
        .parse()
        .map_err(|_| bad_value(key, value, "expected a non-negative integer"))
}

fn p_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| bad_value(key, value, "expected a number"))
}

fn p_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad_value(key, value, "expected true or false")),
    }
}

fn p_widths(key: &str, value: &str) -> Result<[usize; 3]> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(bad_value(key, value, "expected three comma-separated integers"));
    }
    let mut out = [0_usize; 3];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part
            .parse()
            .map_err(|_| bad_value(key, value, "expected three comma-separated integers"))?;
    }
    Ok(out)
}
