//! Noise-prediction training for the toy denoiser.
//!
//! The loop is the standard denoising objective: draw a clean image, a
//! step `t` and a noise field, build the noised latent, and regress the
//! network output onto the noise with a mean-squared error. Optimization
//! is Adam with bias correction. Everything is driven by a seeded RNG
//! with a documented draw order, so a fixed seed reproduces the same
//! weights on the same target.
//!
//! Draw order, training stream (stream 0 of the seeded generator), per
//! optimizer step and batch item: image index, then `t`, then the noise
//! field row-major. Evaluation tuples come from stream 1 and are drawn
//! once up front: image index, `t`, noise field, repeated per tuple.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{PfadError, Result};
use crate::image::Image;
use crate::schedule::NoiseSchedule;
use crate::toy::{backward, Act, Grads, ToyConfig, ToyDenoiser};

/// Hyperparameters for [`train_toy_denoiser`].
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    /// Optimizer steps.
    pub steps: usize,
    /// Samples per optimizer step.
    pub batch_size: usize,
    /// Adam learning rate.
    pub lr: f32,
    /// Seed for weight init and for all sampling during training.
    pub seed: u64,
    /// Channel widths of the network, shallow to deep.
    pub widths: [usize; 3],
    /// Sinusoidal time-embedding dimension.
    pub time_dim: usize,
    /// Number of held-out evaluation tuples.
    pub holdout: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 2000,
            batch_size: 4,
            lr: 1e-4,
            seed: 0,
            widths: ToyConfig::default().widths,
            time_dim: ToyConfig::default().time_dim,
            holdout: 16,
        }
    }
}

impl TrainConfig {
    /// A budget that finishes in minutes on one CPU core and reliably
    /// halves the held-out loss on a small phantom corpus.
    pub fn desk() -> Self {
        Self {
            steps: 400,
            lr: 2e-3,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(PfadError::InvalidParam {
                name: "steps",
                reason: "training budget must be positive".into(),
            });
        }
        if self.batch_size == 0 {
            return Err(PfadError::InvalidParam {
                name: "batch_size",
                reason: "must be positive".into(),
            });
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(PfadError::InvalidParam {
                name: "lr",
                reason: format!("{} is not a positive finite rate", self.lr),
            });
        }
        if self.holdout == 0 {
            return Err(PfadError::InvalidParam {
                name: "holdout",
                reason: "need at least one evaluation tuple".into(),
            });
        }
        Ok(())
    }
}

/// Held-out losses before and after training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainReport {
    /// Mean squared noise-prediction error of the fresh network on the
    /// evaluation tuples. The fresh network predicts zero, so this is
    /// close to 1 (the energy of unit normal noise).
    pub initial_loss: f64,
    /// Same evaluation after the final optimizer step.
    pub final_loss: f64,
    /// Optimizer steps taken.
    pub steps: usize,
}

/// One fixed evaluation sample: which image, which step, which noise.
struct EvalTuple {
    img: usize,
    t: usize,
    eps: Act,
}

/// Trains a fresh network to predict the noise component of diffused
/// images from `corpus`.
///
/// When the corpus has more than one image, one eighth of it (at least
/// one image) is reserved for evaluation and never trained on; a
/// single-image corpus is evaluated on that image. The report carries
/// the held-out loss before and after training so callers can verify
/// the run improved on the untrained baseline.
pub fn train_toy_denoiser(
    corpus: &[Image],
    schedule: &NoiseSchedule,
    config: &TrainConfig,
) -> Result<(ToyDenoiser, TrainReport)> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(PfadError::CorpusTooSmall("no images supplied".into()));
    }
    let dims = corpus[0].dims();
    for img in corpus {
        if img.dims() != dims {
            return Err(PfadError::ShapeMismatch {
                expected: dims,
                got: img.dims(),
            });
        }
    }
    let fields: Vec<Act> = corpus.iter().map(image_to_act).collect();
    let (holdout, train): (&[Act], &[Act]) = if fields.len() == 1 {
        (&fields, &fields)
    } else {
        let n_hold = (fields.len() / 8).max(1);
        let split = fields.len() - n_hold;
        (&fields[split..], &fields[..split])
    };

    let mut net = ToyDenoiser::init(
        ToyConfig {
            widths: config.widths,
            time_dim: config.time_dim,
        },
        config.seed,
    )?;
    // The forward pass enforces the dimension constraints; probe once so
    // a bad corpus fails before any work is done.
    net.forward(&fields[0], 1)?;

    let mut eval_rng = ChaCha12Rng::seed_from_u64(config.seed);
    eval_rng.set_stream(1);
    let eval_set: Vec<EvalTuple> = (0..config.holdout)
        .map(|_| EvalTuple {
            img: eval_rng.gen_range(0..holdout.len()),
            t: eval_rng.gen_range(1..=schedule.t_max()),
            eps: normal_act(dims.0, dims.1, &mut eval_rng),
        })
        .collect();

    let initial_loss = eval_loss(&net, schedule, holdout, &eval_set)?;

    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    rng.set_stream(0);
    let mut opt = Adam::new(&net, config.lr);
    let mut grads = Grads::zeros_like(&net);

    for step in 0..config.steps {
        zero_grads(&mut grads);
        let mut batch_loss = 0.0_f64;
        for _ in 0..config.batch_size {
            let x0 = &train[rng.gen_range(0..train.len())];
            let t = rng.gen_range(1..=schedule.t_max());
            let eps = normal_act(dims.0, dims.1, &mut rng);
            let x_t = diffuse(x0, &eps, schedule.alpha_bar(t));
            let pass = net.forward(&x_t, t)?;
            // d(mean rᵢ²)/d ε̂ = 2r/N; the batch average is applied once
            // after accumulation.
            let n = eps.data.len() as f32;
            let mut grad_out = Act::zeros(eps.ch, eps.h, eps.w);
            let mut sum = 0.0_f64;
            for ((g, p), e) in grad_out
                .data
                .iter_mut()
                .zip(&pass.output.data)
                .zip(&eps.data)
            {
                let r = p - e;
                sum += f64::from(r) * f64::from(r);
                *g = 2.0 * r / n;
            }
            batch_loss += sum / f64::from(n);
            backward(&net, &pass, &grad_out, &mut grads);
        }
        batch_loss /= config.batch_size as f64;
        if !batch_loss.is_finite() {
            return Err(PfadError::TrainingDiverged { step });
        }
        grads.scale(1.0 / config.batch_size as f32);
        opt.update(&mut net, &grads);
    }

    let final_loss = eval_loss(&net, schedule, holdout, &eval_set)?;
    if !final_loss.is_finite() {
        return Err(PfadError::TrainingDiverged { step: config.steps });
    }
    Ok((
        net,
        TrainReport {
            initial_loss,
            final_loss,
            steps: config.steps,
        },
    ))
}

/// Mean squared noise-prediction error over the fixed evaluation tuples.
fn eval_loss(
    net: &ToyDenoiser,
    schedule: &NoiseSchedule,
    holdout: &[Act],
    eval_set: &[EvalTuple],
) -> Result<f64> {
    let mut total = 0.0_f64;
    for tuple in eval_set {
        let x_t = diffuse(&holdout[tuple.img], &tuple.eps, schedule.alpha_bar(tuple.t));
        let pred = net.predict(&x_t, tuple.t)?;
        let mut sum = 0.0_f64;
        for (p, e) in pred.data.iter().zip(&tuple.eps.data) {
            let r = f64::from(p - e);
            sum += r * r;
        }
        total += sum / tuple.eps.data.len() as f64;
    }
    Ok(total / eval_set.len() as f64)
}

fn image_to_act(img: &Image) -> Act {
    let (h, w) = img.dims();
    let mut a = Act::zeros(1, h, w);
    for (dst, src) in a.data.iter_mut().zip(img.data().iter()) {
        *dst = *src as f32;
    }
    a
}

fn normal_act(h: usize, w: usize, rng: &mut ChaCha12Rng) -> Act {
    let mut a = Act::zeros(1, h, w);
    for v in a.data.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    a
}

/// `√ᾱ·x0 + √(1−ᾱ)·ε` in single precision.
fn diffuse(x0: &Act, eps: &Act, alpha_bar: f64) -> Act {
    let sa = (alpha_bar as f32).sqrt();
    let sn = (1.0 - alpha_bar as f32).sqrt();
    let mut out = Act::zeros(x0.ch, x0.h, x0.w);
    for ((o, x), e) in out.data.iter_mut().zip(&x0.data).zip(&eps.data) {
        *o = sa * x + sn * e;
    }
    out
}

fn zero_grads(g: &mut Grads) {
    for t in g
        .conv_w
        .iter_mut()
        .chain(g.conv_b.iter_mut())
        .chain(g.dense_w.iter_mut())
        .chain(g.dense_b.iter_mut())
    {
        t.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Adam with bias correction (β₁ = 0.9, β₂ = 0.999, ε = 1e-8).
struct Adam {
    lr: f32,
    step: u32,
    m: Vec<Vec<f32>>,
    v: Vec<Vec<f32>>,
}

const ADAM_BETA1: f32 = 0.9;
const ADAM_BETA2: f32 = 0.999;
const ADAM_EPS: f32 = 1e-8;

impl Adam {
    fn new(net: &ToyDenoiser, lr: f32) -> Self {
        let sizes: Vec<usize> = net.tensors().iter().map(|(_, t)| t.len()).collect();
        Self {
            lr,
            step: 0,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    fn update(&mut self, net: &mut ToyDenoiser, grads: &Grads) {
        self.step += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.step as i32);
        let c2 = 1.0 - ADAM_BETA2.powi(self.step as i32);
        let params = net.tensors_mut();
        let gslices = grads.tensors();
        for ((tensor, grad), (m, v)) in params
            .into_iter()
            .zip(gslices)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for ((p, &g), (m, v)) in tensor
                .iter_mut()
                .zip(grad)
                .zip(m.iter_mut().zip(v.iter_mut()))
            {
                *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                let mhat = *m / c1;
                let vhat = *v / c2;
                *p -= self.lr * mhat / (vhat.sqrt() + ADAM_EPS);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{generate_phantom, PhantomSpec};
    use crate::schedule::make_schedule;

    fn small_corpus(n: usize, size: usize) -> Vec<Image> {
        (0..n)
            .map(|i| {
                generate_phantom(&PhantomSpec {
                    size,
                    ellipse_count: 3,
                    intensity_range: (0.1, 0.9),
                    seed: 100 + i as u64,
                })
                .unwrap()
            })
            .collect()
    }

    fn tiny_train_cfg() -> TrainConfig {
        TrainConfig {
            steps: 40,
            batch_size: 2,
            lr: 5e-3,
            seed: 7,
            widths: [2, 3, 4],
            time_dim: 8,
            holdout: 4,
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let schedule = make_schedule(10, 1e-3, 0.2).unwrap();
        let cfg = tiny_train_cfg();
        assert!(matches!(
            train_toy_denoiser(&[], &schedule, &cfg),
            Err(PfadError::CorpusTooSmall(_))
        ));
        assert!(matches!(
            train_toy_denoiser(
                &small_corpus(1, 16),
                &schedule,
                &TrainConfig {
                    steps: 0,
                    ..tiny_train_cfg()
                }
            ),
            Err(PfadError::InvalidParam { name: "steps", .. })
        ));
        let mut mixed = small_corpus(1, 16);
        mixed.extend(small_corpus(1, 32));
        assert!(matches!(
            train_toy_denoiser(&mixed, &schedule, &cfg),
            Err(PfadError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn loss_decreases_on_small_corpus() {
        let schedule = make_schedule(10, 1e-3, 0.2).unwrap();
        let corpus = small_corpus(6, 16);
        let (_, report) = train_toy_denoiser(&corpus, &schedule, &tiny_train_cfg()).unwrap();
        assert!(
            report.final_loss < report.initial_loss,
            "loss went {} -> {}",
            report.initial_loss,
            report.final_loss
        );
        // An untrained network predicts zero, so the starting loss is the
        // mean noise energy.
        assert!((report.initial_loss - 1.0).abs() < 0.35);
    }

    #[test]
    fn identical_images_still_train() {
        let schedule = make_schedule(10, 1e-3, 0.2).unwrap();
        let one = small_corpus(1, 16).remove(0);
        let corpus = vec![one.clone(), one.clone(), one];
        let (_, report) = train_toy_denoiser(&corpus, &schedule, &tiny_train_cfg()).unwrap();
        assert!(report.final_loss < report.initial_loss);
    }

    #[test]
    fn same_seed_reproduces_weights() {
        let schedule = make_schedule(10, 1e-3, 0.2).unwrap();
        let corpus = small_corpus(4, 16);
        let cfg = TrainConfig {
            steps: 10,
            ..tiny_train_cfg()
        };
        let (a, ra) = train_toy_denoiser(&corpus, &schedule, &cfg).unwrap();
        let (b, rb) = train_toy_denoiser(&corpus, &schedule, &cfg).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(a, b);
    }
}
