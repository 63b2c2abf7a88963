//! A small trainable noise-prediction network.
//!
//! Three-level encoder-decoder in `f32`: two stride-2 average-pool
//! downsamplings, nearest-neighbor upsampling, skip connections by channel
//! concatenation, and a sinusoidal timestep embedding projected into a
//! per-channel bias at the start of every level. All convolutions are 3x3
//! with zero padding; the output head starts at zero so an untrained
//! network predicts the zero field.
//!
//! Everything — forward, backward, optimizer — is hand-rolled on flat
//! `Vec<f32>` tensors in `(channel, row, column)` layout, which keeps the
//! dependency surface tiny and the arithmetic deterministic. Inference
//! through [`Denoiser`] is read-only and therefore thread-safe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::denoiser::Denoiser;
use crate::error::{PfadError, Result};
use crate::image::Field;

/// Hard ceiling on parameter count; this is a desk-scale network.
pub const MAX_PARAMS: usize = 5_000_000;

/// Architecture hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyConfig {
    /// Channel widths of the three levels, shallow to deep.
    pub widths: [usize; 3],
    /// Sinusoidal timestep embedding length (even, >= 4).
    pub time_dim: usize,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            widths: [8, 16, 32],
            time_dim: 32,
        }
    }
}

impl ToyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.widths.iter().any(|&w| w == 0) {
            return Err(PfadError::InvalidParam {
                name: "widths",
                reason: "all channel widths must be >= 1".into(),
            });
        }
        if self.time_dim < 4 || self.time_dim % 2 != 0 {
            return Err(PfadError::InvalidParam {
                name: "time_dim",
                reason: format!("{} must be even and >= 4", self.time_dim),
            });
        }
        Ok(())
    }
}

/// 3x3 same-padding convolution parameters; weights in
/// `(out, in, ky, kx)` order.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Conv {
    pub w: Vec<f32>,
    pub b: Vec<f32>,
    pub in_ch: usize,
    pub out_ch: usize,
}

/// Fully connected projection of the time embedding.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dense {
    pub w: Vec<f32>,
    pub b: Vec<f32>,
    pub in_dim: usize,
    pub out_dim: usize,
}

/// A flat `(C, H, W)` activation buffer.
#[derive(Debug, Clone)]
pub(crate) struct Act {
    pub data: Vec<f32>,
    pub ch: usize,
    pub h: usize,
    pub w: usize,
}

impl Act {
    pub fn zeros(ch: usize, h: usize, w: usize) -> Self {
        Self {
            data: vec![0.0; ch * h * w],
            ch,
            h,
            w,
        }
    }
}

/// The trainable denoiser.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyDenoiser {
    pub(crate) cfg: ToyConfig,
    pub(crate) convs: Vec<Conv>,  // fixed order, see `conv_layout`
    pub(crate) dense: Vec<Dense>, // five time projections, shallow to deep to shallow
    /// Checkpoint format version this instance serializes as.
    pub version: u32,
}

/// `(in_ch, out_ch)` of every convolution, in execution order.
pub(crate) fn conv_layout(cfg: &ToyConfig) -> [(usize, usize); 11] {
    let [c0, c1, c2] = cfg.widths;
    [
        (1, c0),       // conv_in
        (c0, c0),      // enc level 0
        (c0, c1),      // enc level 1 entry (after pool)
        (c1, c1),      // enc level 1
        (c1, c2),      // bottleneck entry (after pool)
        (c2, c2),      // bottleneck
        (c2 + c1, c1), // dec level 1 entry (after upsample + skip)
        (c1, c1),      // dec level 1
        (c1 + c0, c0), // dec level 0 entry (after upsample + skip)
        (c0, c0),      // dec level 0
        (c0, 1),       // output head
    ]
}

/// Output widths of the five time-embedding projections, in injection
/// order (enc0, enc1, bottleneck, dec1, dec0).
pub(crate) fn dense_layout(cfg: &ToyConfig) -> [usize; 5] {
    let [c0, c1, c2] = cfg.widths;
    [c0, c1, c2, c1, c0]
}

/// Convolutions that receive the time bias, as indices into `conv_layout`.
const TIME_INJECTED: [usize; 5] = [0, 2, 4, 6, 8];

impl ToyDenoiser {
    /// Fresh network with seeded uniform He-style init; the output head is
    /// zero-initialized so the starting prediction is the zero field.
    pub fn init(cfg: ToyConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut convs = Vec::new();
        let layout = conv_layout(&cfg);
        let head = layout.len() - 1;
        for (i, &(ci, co)) in layout.iter().enumerate() {
            let n = co * ci * 9;
            let w = if i == head {
                vec![0.0; n]
            } else {
                let bound = (6.0 / (ci * 9) as f32).sqrt();
                (0..n).map(|_| rng.gen_range(-bound..bound)).collect()
            };
            convs.push(Conv {
                w,
                b: vec![0.0; co],
                in_ch: ci,
                out_ch: co,
            });
        }
        let mut dense = Vec::new();
        for &out in &dense_layout(&cfg) {
            let bound = (6.0 / cfg.time_dim as f32).sqrt();
            dense.push(Dense {
                w: (0..out * cfg.time_dim)
                    .map(|_| rng.gen_range(-bound..bound))
                    .collect(),
                b: vec![0.0; out],
                in_dim: cfg.time_dim,
                out_dim: out,
            });
        }
        let net = Self {
            cfg,
            convs,
            dense,
            version: 1,
        };
        if net.param_count() >= MAX_PARAMS {
            return Err(PfadError::InvalidParam {
                name: "widths",
                reason: format!("{} parameters exceeds the desk-scale cap", net.param_count()),
            });
        }
        Ok(net)
    }

    pub fn config(&self) -> ToyConfig {
        self.cfg
    }

    pub fn param_count(&self) -> usize {
        self.convs.iter().map(|c| c.w.len() + c.b.len()).sum::<usize>()
            + self.dense.iter().map(|d| d.w.len() + d.b.len()).sum::<usize>()
    }

    /// All parameter tensors in checkpoint order, with their shapes.
    pub(crate) fn tensors(&self) -> Vec<(Vec<usize>, &[f32])> {
        let mut out: Vec<(Vec<usize>, &[f32])> = Vec::new();
        for c in &self.convs {
            out.push((vec![c.out_ch, c.in_ch, 3, 3], &c.w));
            out.push((vec![c.out_ch], &c.b));
        }
        for d in &self.dense {
            out.push((vec![d.out_dim, d.in_dim], &d.w));
            out.push((vec![d.out_dim], &d.b));
        }
        out
    }

    pub(crate) fn tensors_mut(&mut self) -> Vec<&mut Vec<f32>> {
        let mut out: Vec<&mut Vec<f32>> = Vec::new();
        for c in &mut self.convs {
            out.push(&mut c.w);
            out.push(&mut c.b);
        }
        for d in &mut self.dense {
            out.push(&mut d.w);
            out.push(&mut d.b);
        }
        out
    }

    /// Forward pass on a single `(1, H, W)` input, keeping every
    /// intermediate needed by [`backward`]. `H` and `W` must be multiples
    /// of 4 (two pooling levels) and at least 8.
    pub(crate) fn forward(&self, x: &Act, t: usize) -> Result<ForwardPass> {
        if x.h % 4 != 0 || x.w % 4 != 0 || x.h < 8 || x.w < 8 {
            return Err(PfadError::InvalidParam {
                name: "input",
                reason: format!(
                    "{}x{} not supported: dimensions must be multiples of 4, at least 8",
                    x.h, x.w
                ),
            });
        }
        let emb = time_embedding(t, self.cfg.time_dim);
        let bias: Vec<Vec<f32>> = self.dense.iter().map(|d| dense_forward(d, &emb)).collect();

        let mut acts = Vec::with_capacity(16);
        let mut cur = x.clone();
        for (li, conv) in self.convs.iter().enumerate() {
            // Structural moves before certain convolutions.
            match li {
                2 | 4 => {
                    acts.push(StepCache::PrePool(cur.clone()));
                    cur = avgpool2(&cur);
                }
                6 => {
                    let up = upsample2(&cur);
                    let skip = acts_find_skip(&acts, 3); // enc level 1 output
                    cur = concat(&up, skip);
                    acts.push(StepCache::PreConcat {
                        upstream_ch: up.ch,
                    });
                }
                8 => {
                    let up = upsample2(&cur);
                    let skip = acts_find_skip(&acts, 1); // enc level 0 output
                    cur = concat(&up, skip);
                    acts.push(StepCache::PreConcat {
                        upstream_ch: up.ch,
                    });
                }
                _ => {}
            }
            let input = cur.clone();
            let mut out = conv3x3_forward(conv, &cur);
            if let Some(pos) = TIME_INJECTED.iter().position(|&i| i == li) {
                add_channel_bias(&mut out, &bias[pos]);
            }
            if li != self.convs.len() - 1 {
                relu_inplace(&mut out);
            }
            acts.push(StepCache::Conv {
                layer: li,
                input,
                output: out.clone(),
            });
            cur = out;
        }
        Ok(ForwardPass {
            emb,
            steps: acts,
            output: cur,
        })
    }

    /// Convenience inference entry point used by tests and tooling.
    pub(crate) fn predict(&self, x: &Act, t: usize) -> Result<Act> {
        Ok(self.forward(x, t)?.output)
    }
}

impl Denoiser for ToyDenoiser {
    fn predict_noise(&self, x_t: &Field, t: usize) -> Result<Field> {
        let (h, w) = x_t.dim();
        let mut input = Act::zeros(1, h, w);
        for (dst, src) in input.data.iter_mut().zip(x_t.iter()) {
            *dst = *src as f32;
        }
        let out = self.predict(&input, t)?;
        Ok(Field::from_shape_fn((h, w), |(r, c)| {
            out.data[r * w + c] as f64
        }))
    }
}

/// Cached state of one forward pass.
pub(crate) struct ForwardPass {
    pub emb: Vec<f32>,
    steps: Vec<StepCache>,
    pub output: Act,
}

enum StepCache {
    Conv {
        layer: usize,
        input: Act,
        output: Act,
    },
    PrePool(Act),
    PreConcat {
        upstream_ch: usize,
    },
}

fn acts_find_skip(acts: &[StepCache], layer: usize) -> &Act {
    acts.iter()
        .find_map(|s| match s {
            StepCache::Conv {
                layer: l, output, ..
            } if *l == layer => Some(output),
            _ => None,
        })
        .expect("skip source recorded earlier in the pass")
}

/// Parameter gradients, same tensor order as [`ToyDenoiser::tensors`].
pub(crate) struct Grads {
    pub conv_w: Vec<Vec<f32>>,
    pub conv_b: Vec<Vec<f32>>,
    pub dense_w: Vec<Vec<f32>>,
    pub dense_b: Vec<Vec<f32>>,
}

impl Grads {
    pub fn zeros_like(net: &ToyDenoiser) -> Self {
        Self {
            conv_w: net.convs.iter().map(|c| vec![0.0; c.w.len()]).collect(),
            conv_b: net.convs.iter().map(|c| vec![0.0; c.b.len()]).collect(),
            dense_w: net.dense.iter().map(|d| vec![0.0; d.w.len()]).collect(),
            dense_b: net.dense.iter().map(|d| vec![0.0; d.b.len()]).collect(),
        }
    }

    /// Gradient slices in the same order as [`ToyDenoiser::tensors`].
    pub fn tensors(&self) -> Vec<&[f32]> {
        let mut out: Vec<&[f32]> = Vec::new();
        for (w, b) in self.conv_w.iter().zip(&self.conv_b) {
            out.push(w);
            out.push(b);
        }
        for (w, b) in self.dense_w.iter().zip(&self.dense_b) {
            out.push(w);
            out.push(b);
        }
        out
    }

    pub fn scale(&mut self, s: f32) {
        for g in self
            .conv_w
            .iter_mut()
            .chain(self.conv_b.iter_mut())
            .chain(self.dense_w.iter_mut())
            .chain(self.dense_b.iter_mut())
        {
            for v in g.iter_mut() {
                *v *= s;
            }
        }
    }
}

/// Backpropagates `grad_out` (gradient w.r.t. the network output) through
/// a cached pass, accumulating parameter gradients into `grads`.
pub(crate) fn backward(net: &ToyDenoiser, pass: &ForwardPass, grad_out: &Act, grads: &mut Grads) {
    let mut grad = grad_out.clone();
    let mut time_grad: Vec<Option<Vec<f32>>> = vec![None; net.dense.len()];

    for step_idx in (0..pass.steps.len()).rev() {
        match &pass.steps[step_idx] {
            StepCache::Conv {
                layer,
                input,
                output,
            } => {
                let li = *layer;
                if li != net.convs.len() - 1 {
                    relu_backward(&mut grad, output);
                }
                if let Some(pos) = TIME_INJECTED.iter().position(|&i| i == li) {
                    accumulate_time_grad(&mut time_grad[pos], &grad);
                }
                let gin = conv3x3_backward(
                    &net.convs[li],
                    input,
                    &grad,
                    &mut grads.conv_w[li],
                    &mut grads.conv_b[li],
                    li != 0,
                );
                if let Some(gin) = gin {
                    grad = gin;
                } else {
                    break; // reached the image input
                }
            }
            StepCache::PrePool(pre) => {
                grad = avgpool2_backward(&grad, pre.h, pre.w);
            }
            StepCache::PreConcat { upstream_ch } => {
                // Split the gradient: the first channels flow up through
                // the upsample; the rest belong to the skip connection and
                // re-enter the encoder at the layer that produced it.
                // Gradients are linear, so propagating the skip's share
                // through the shared encoder prefix in a separate walk and
                // accumulating is equivalent to summing first.
                let (gup, gskip) = split_channels(&grad, *upstream_ch);
                grad = upsample2_backward(&gup);
                backprop_skip(gskip, &pass.steps[..step_idx], net, grads, &mut time_grad);
            }
        }
    }

    // Time projections: d loss / d dense = accumulated per-channel sums.
    for (pos, g) in time_grad.into_iter().enumerate() {
        if let Some(gb) = g {
            dense_backward(&net.dense[pos], &pass.emb, &gb, &mut grads.dense_w[pos], &mut grads.dense_b[pos]);
        }
    }
}

/// Continues backpropagation of a skip-connection gradient through the
/// encoder side it branched from, accumulating into `grads`.
/// Propagate a skip-connection gradient back through the encoder prefix.
///
/// The skip source is the most recent conv step in `earlier` whose output
/// shape matches the gradient; from there the walk continues toward the
/// input, so the skip's share reaches every parameter it depends on.
/// Parameter gradients accumulate on top of the main-path walk.
fn backprop_skip(
    gskip: Act,
    earlier: &[StepCache],
    net: &ToyDenoiser,
    grads: &mut Grads,
    time_grad: &mut [Option<Vec<f32>>],
) {
    let mut grad = gskip;
    for step in earlier.iter().rev() {
        match step {
            StepCache::Conv {
                layer,
                input,
                output,
            } => {
                if output.ch != grad.ch || output.h != grad.h || output.w != grad.w {
                    continue;
                }
                let li = *layer;
                relu_backward(&mut grad, output);
                if let Some(pos) = TIME_INJECTED.iter().position(|&i| i == li) {
                    accumulate_time_grad(&mut time_grad[pos], &grad);
                }
                let gin = conv3x3_backward(
                    &net.convs[li],
                    input,
                    &grad,
                    &mut grads.conv_w[li],
                    &mut grads.conv_b[li],
                    li != 0,
                );
                match gin {
                    Some(g) => grad = g,
                    None => return,
                }
            }
            StepCache::PrePool(pre) => {
                if grad.ch != pre.ch || grad.h * 2 != pre.h {
                    continue;
                }
                grad = avgpool2_backward(&grad, pre.h, pre.w);
            }
            StepCache::PreConcat { .. } => continue,
        }
    }
}

/// Sum a per-channel bias gradient into the slot for one time projection.
fn accumulate_time_grad(slot: &mut Option<Vec<f32>>, grad: &Act) {
    let mut gb = vec![0.0_f32; grad.ch];
    channel_bias_grad(grad, &mut gb);
    match slot {
        Some(existing) => {
            for (a, b) in existing.iter_mut().zip(gb) {
                *a += b;
            }
        }
        None => *slot = Some(gb),
    }
}

// ---------------------------------------------------------------------------
// primitive ops
// ---------------------------------------------------------------------------

/// Sinusoidal embedding of an integer timestep.
pub(crate) fn time_embedding(t: usize, dim: usize) -> Vec<f32> {
    let half = dim / 2;
    let mut e = vec![0.0_f32; dim];
    for k in 0..half {
        let freq = 10000.0_f32.powf(-(k as f32) / (half - 1) as f32);
        let arg = t as f32 * freq;
        e[k] = arg.sin();
        e[half + k] = arg.cos();
    }
    e
}

fn dense_forward(d: &Dense, e: &[f32]) -> Vec<f32> {
    let mut out = d.b.clone();
    for o in 0..d.out_dim {
        let row = &d.w[o * d.in_dim..(o + 1) * d.in_dim];
        let mut acc = 0.0_f32;
        for (wv, ev) in row.iter().zip(e) {
            acc += wv * ev;
        }
        out[o] += acc;
    }
    out
}

fn dense_backward(d: &Dense, e: &[f32], gout: &[f32], gw: &mut [f32], gb: &mut [f32]) {
    for o in 0..d.out_dim {
        gb[o] += gout[o];
        let row = &mut gw[o * d.in_dim..(o + 1) * d.in_dim];
        for (gv, ev) in row.iter_mut().zip(e) {
            *gv += gout[o] * ev;
        }
    }
}

fn add_channel_bias(a: &mut Act, bias: &[f32]) {
    let plane = a.h * a.w;
    for c in 0..a.ch {
        let v = bias[c];
        for x in &mut a.data[c * plane..(c + 1) * plane] {
            *x += v;
        }
    }
}

fn channel_bias_grad(g: &Act, out: &mut [f32]) {
    let plane = g.h * g.w;
    for c in 0..g.ch {
        out[c] += g.data[c * plane..(c + 1) * plane].iter().sum::<f32>();
    }
}

fn relu_inplace(a: &mut Act) {
    for v in &mut a.data {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// Gradient through ReLU given the post-activation values.
fn relu_backward(g: &mut Act, post: &Act) {
    for (gv, &pv) in g.data.iter_mut().zip(post.data.iter()) {
        if pv <= 0.0 {
            *gv = 0.0;
        }
    }
}

pub(crate) fn conv3x3_forward(conv: &Conv, input: &Act) -> Act {
    debug_assert_eq!(conv.in_ch, input.ch);
    let (h, w) = (input.h, input.w);
    let plane = h * w;
    let mut out = Act::zeros(conv.out_ch, h, w);
    for oc in 0..conv.out_ch {
        let obase = oc * plane;
        out.data[obase..obase + plane].fill(conv.b[oc]);
        for ic in 0..conv.in_ch {
            let ibase = ic * plane;
            for ky in 0..3_isize {
                let dy = ky - 1;
                for kx in 0..3_isize {
                    let dx = kx - 1;
                    let wv = conv.w[((oc * conv.in_ch + ic) * 3 + ky as usize) * 3 + kx as usize];
                    for y in 0..h as isize {
                        let sy = y + dy;
                        if sy < 0 || sy >= h as isize {
                            continue;
                        }
                        let x_lo = (-dx).max(0) as usize;
                        let x_hi = (w as isize - dx).min(w as isize) as usize;
                        let orow = obase + y as usize * w;
                        let irow = (ibase + sy as usize * w) as isize + dx;
                        let src = &input.data[(irow + x_lo as isize) as usize
                            ..(irow + x_hi as isize) as usize];
                        let dst = &mut out.data[orow + x_lo..orow + x_hi];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += wv * s;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Backward of the 3x3 convolution. Returns the input gradient unless
/// `need_input_grad` is false (the first layer).
fn conv3x3_backward(
    conv: &Conv,
    input: &Act,
    gout: &Act,
    gw: &mut [f32],
    gb: &mut [f32],
    need_input_grad: bool,
) -> Option<Act> {
    let (h, w) = (input.h, input.w);
    let plane = h * w;
    let mut gin = if need_input_grad {
        Some(Act::zeros(conv.in_ch, h, w))
    } else {
        None
    };
    for oc in 0..conv.out_ch {
        let obase = oc * plane;
        gb[oc] += gout.data[obase..obase + plane].iter().sum::<f32>();
        for ic in 0..conv.in_ch {
            let ibase = ic * plane;
            for ky in 0..3_isize {
                let dy = ky - 1;
                for kx in 0..3_isize {
                    let dx = kx - 1;
                    let widx = ((oc * conv.in_ch + ic) * 3 + ky as usize) * 3 + kx as usize;
                    let wv = conv.w[widx];
                    let mut wacc = 0.0_f32;
                    for y in 0..h as isize {
                        let sy = y + dy;
                        if sy < 0 || sy >= h as isize {
                            continue;
                        }
                        let x_lo = (-dx).max(0) as usize;
                        let x_hi = (w as isize - dx).min(w as isize) as usize;
                        let orow = obase + y as usize * w;
                        let irow = (ibase + sy as usize * w) as isize + dx;
                        let (s0, s1) =
                            ((irow + x_lo as isize) as usize, (irow + x_hi as isize) as usize);
                        let g = &gout.data[orow + x_lo..orow + x_hi];
                        let src = &input.data[s0..s1];
                        for (gv, sv) in g.iter().zip(src) {
                            wacc += gv * sv;
                        }
                        if let Some(gin) = &mut gin {
                            let dst = &mut gin.data[s0..s1];
                            for (d, gv) in dst.iter_mut().zip(g) {
                                *d += wv * gv;
                            }
                        }
                    }
                    gw[widx] += wacc;
                }
            }
        }
    }
    gin
}

fn avgpool2(a: &Act) -> Act {
    let (oh, ow) = (a.h / 2, a.w / 2);
    let mut out = Act::zeros(a.ch, oh, ow);
    let plane = a.h * a.w;
    let oplane = oh * ow;
    for c in 0..a.ch {
        for y in 0..oh {
            for x in 0..ow {
                let i = c * plane + 2 * y * a.w + 2 * x;
                out.data[c * oplane + y * ow + x] =
                    0.25 * (a.data[i] + a.data[i + 1] + a.data[i + a.w] + a.data[i + a.w + 1]);
            }
        }
    }
    out
}

fn avgpool2_backward(g: &Act, in_h: usize, in_w: usize) -> Act {
    let mut out = Act::zeros(g.ch, in_h, in_w);
    let plane = in_h * in_w;
    let gplane = g.h * g.w;
    for c in 0..g.ch {
        for y in 0..g.h {
            for x in 0..g.w {
                let v = 0.25 * g.data[c * gplane + y * g.w + x];
                let i = c * plane + 2 * y * in_w + 2 * x;
                out.data[i] += v;
                out.data[i + 1] += v;
                out.data[i + in_w] += v;
                out.data[i + in_w + 1] += v;
            }
        }
    }
    out
}

fn upsample2(a: &Act) -> Act {
    let (oh, ow) = (a.h * 2, a.w * 2);
    let mut out = Act::zeros(a.ch, oh, ow);
    let plane = a.h * a.w;
    let oplane = oh * ow;
    for c in 0..a.ch {
        for y in 0..oh {
            for x in 0..ow {
                out.data[c * oplane + y * ow + x] = a.data[c * plane + (y / 2) * a.w + x / 2];
            }
        }
    }
    out
}

fn upsample2_backward(g: &Act) -> Act {
    let (oh, ow) = (g.h / 2, g.w / 2);
    let mut out = Act::zeros(g.ch, oh, ow);
    let plane = oh * ow;
    let gplane = g.h * g.w;
    for c in 0..g.ch {
        for y in 0..g.h {
            for x in 0..g.w {
                out.data[c * plane + (y / 2) * ow + x / 2] += g.data[c * gplane + y * g.w + x];
            }
        }
    }
    out
}

fn concat(a: &Act, b: &Act) -> Act {
    debug_assert_eq!((a.h, a.w), (b.h, b.w));
    let mut out = Act::zeros(a.ch + b.ch, a.h, a.w);
    out.data[..a.data.len()].copy_from_slice(&a.data);
    out.data[a.data.len()..].copy_from_slice(&b.data);
    out
}

fn split_channels(g: &Act, first_ch: usize) -> (Act, Act) {
    let plane = g.h * g.w;
    let a = Act {
        data: g.data[..first_ch * plane].to_vec(),
        ch: first_ch,
        h: g.h,
        w: g.w,
    };
    let b = Act {
        data: g.data[first_ch * plane..].to_vec(),
        ch: g.ch - first_ch,
        h: g.h,
        w: g.w,
    };
    (a, b)
}
