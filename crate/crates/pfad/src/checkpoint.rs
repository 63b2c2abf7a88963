//! Binary serialization of trained denoisers.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "PFADCKPT"            8-byte magic
//! version   u32         currently 1
//! t_steps   f64         schedule length (integer-valued)
//! beta_s    f64         noise schedule start
//! beta_e    f64         noise schedule end
//! n_tensors u32         layer-dimension table length
//!   ndim  u32           per tensor
//!   dims  u32 × ndim
//! n_weights u64         total scalar count, must match the table
//! weights   f32 × n_weights   tensors in declared order
//! ```
//!
//! Loading validates the magic, the version, the dimension table against
//! the architecture it implies, and the total weight count.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{PfadError, Result};
use crate::schedule::{make_schedule, NoiseSchedule};
use crate::toy::{ToyConfig, ToyDenoiser};

const MAGIC: &[u8; 8] = b"PFADCKPT";

/// Supported format version.
pub const CHECKPOINT_VERSION: u32 = 1;

/// Writes `net` and the schedule it was trained against to `path`.
pub fn save_checkpoint(path: &Path, net: &ToyDenoiser, schedule: &NoiseSchedule) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(schedule.t_max() as f64).to_le_bytes())?;
    let (bs, be) = schedule.beta_range();
    w.write_all(&bs.to_le_bytes())?;
    w.write_all(&be.to_le_bytes())?;

    let tensors = net.tensors();
    w.write_all(&(tensors.len() as u32).to_le_bytes())?;
    for (dims, _) in &tensors {
        w.write_all(&(dims.len() as u32).to_le_bytes())?;
        for &d in dims {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
    }
    let total: usize = tensors.iter().map(|(_, t)| t.len()).sum();
    w.write_all(&(total as u64).to_le_bytes())?;
    for (_, t) in &tensors {
        for &v in *t {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a checkpoint written by [`save_checkpoint`].
pub fn load_checkpoint(path: &Path) -> Result<(ToyDenoiser, NoiseSchedule)> {
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0_u8; 8];
    read_all(&mut r, &mut magic)?;
    if &magic != MAGIC {
        return Err(PfadError::Checkpoint(format!(
            "bad magic {:?}, not a checkpoint file",
            &magic
        )));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(PfadError::Checkpoint(format!(
            "unsupported format version {version} (expected {CHECKPOINT_VERSION})"
        )));
    }
    let t_raw = read_f64(&mut r)?;
    if !(t_raw.is_finite() && t_raw >= 1.0 && t_raw.fract() == 0.0 && t_raw <= 1e9) {
        return Err(PfadError::Checkpoint(format!(
            "schedule length {t_raw} is not a positive whole number"
        )));
    }
    let beta_start = read_f64(&mut r)?;
    let beta_end = read_f64(&mut r)?;
    let schedule = make_schedule(t_raw as usize, beta_start, beta_end)
        .map_err(|e| PfadError::Checkpoint(format!("stored schedule is invalid: {e}")))?;

    let n_tensors = read_u32(&mut r)? as usize;
    let mut dims_table: Vec<Vec<usize>> = Vec::with_capacity(n_tensors);
    for _ in 0..n_tensors {
        let ndim = read_u32(&mut r)? as usize;
        if ndim == 0 || ndim > 4 {
            return Err(PfadError::Checkpoint(format!(
                "tensor with {ndim} dimensions in layer table"
            )));
        }
        let mut dims = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            dims.push(read_u32(&mut r)? as usize);
        }
        dims_table.push(dims);
    }
    let net = net_from_dims(&dims_table)?;

    let declared = read_u64(&mut r)? as usize;
    let expected: usize = dims_table.iter().map(|d| d.iter().product::<usize>()).sum();
    if declared != expected {
        return Err(PfadError::Checkpoint(format!(
            "weight count {declared} does not match the layer table ({expected})"
        )));
    }

    let mut net = net;
    let mut buf = [0_u8; 4];
    for tensor in net.tensors_mut() {
        for v in tensor.iter_mut() {
            read_all(&mut r, &mut buf)
                .map_err(|_| PfadError::Checkpoint("truncated weight block".into()))?;
            *v = f32::from_le_bytes(buf);
        }
    }
    if r.read(&mut buf)? != 0 {
        return Err(PfadError::Checkpoint(
            "trailing data after weight block".into(),
        ));
    }
    Ok((net, schedule))
}

/// Rebuilds the architecture implied by a stored dimension table and
/// checks every entry against it.
fn net_from_dims(dims_table: &[Vec<usize>]) -> Result<ToyDenoiser> {
    // Widths are recoverable from the first convolution of each level and
    // the time dimension from the first projection; everything else must
    // then agree exactly.
    let need = |idx: usize, what: &str| -> Result<&Vec<usize>> {
        dims_table.get(idx).ok_or_else(|| {
            PfadError::Checkpoint(format!("layer table too short, missing {what}"))
        })
    };
    let c0 = *need(0, "input conv")?.first().unwrap_or(&0);
    let c1 = *need(4, "level-1 conv")?.first().unwrap_or(&0);
    let c2 = *need(8, "bottleneck conv")?.first().unwrap_or(&0);
    let time_dim = *need(22, "time projection")?.get(1).unwrap_or(&0);
    let cfg = ToyConfig {
        widths: [c0, c1, c2],
        time_dim,
    };
    let net = ToyDenoiser::init(cfg, 0)
        .map_err(|e| PfadError::Checkpoint(format!("stored architecture is invalid: {e}")))?;
    let expected = net.tensors();
    if expected.len() != dims_table.len() {
        return Err(PfadError::Checkpoint(format!(
            "layer table has {} tensors, architecture needs {}",
            dims_table.len(),
            expected.len()
        )));
    }
    for (i, ((dims, _), stored)) in expected.iter().zip(dims_table).enumerate() {
        if dims != stored {
            return Err(PfadError::Checkpoint(format!(
                "tensor {i} has shape {stored:?}, architecture needs {dims:?}"
            )));
        }
    }
    Ok(net)
}

fn read_all(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| PfadError::Checkpoint("file truncated".into()))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0_u8; 4];
    read_all(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0_u8; 8];
    read_all(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0_u8; 8];
    read_all(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::make_schedule;
    use std::fs;

    fn sample_net() -> ToyDenoiser {
        ToyDenoiser::init(
            ToyConfig {
                widths: [2, 3, 4],
                time_dim: 8,
            },
            42,
        )
        .unwrap()
    }

    #[test]
    fn round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        let net = sample_net();
        let schedule = make_schedule(25, 2e-3, 0.1).unwrap();
        save_checkpoint(&path, &net, &schedule).unwrap();
        let (loaded, loaded_schedule) = load_checkpoint(&path).unwrap();
        assert_eq!(loaded, net);
        assert_eq!(loaded_schedule.t_max(), 25);
        assert_eq!(loaded_schedule.beta_range(), (2e-3, 0.1));
    }

    #[test]
    fn rejects_bad_magic_version_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        let net = sample_net();
        let schedule = make_schedule(10, 1e-3, 0.2).unwrap();
        save_checkpoint(&path, &net, &schedule).unwrap();
        let good = fs::read(&path).unwrap();

        let mut bad = good.clone();
        bad[0] ^= 0xFF;
        fs::write(&path, &bad).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(PfadError::Checkpoint(m)) if m.contains("magic")
        ));

        let mut bad = good.clone();
        bad[8] = 99;
        fs::write(&path, &bad).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(PfadError::Checkpoint(m)) if m.contains("version")
        ));

        fs::write(&path, &good[..good.len() - 3]).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(PfadError::Checkpoint(m)) if m.contains("truncated")
        ));

        let mut bad = good.clone();
        bad.push(0);
        fs::write(&path, &bad).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(PfadError::Checkpoint(m)) if m.contains("trailing")
        ));
    }

    #[test]
    fn rejects_weight_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        let net = sample_net();
        let schedule = make_schedule(10, 1e-3, 0.2).unwrap();
        save_checkpoint(&path, &net, &schedule).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        // The u64 weight count sits right before the weight block.
        let weights = net.param_count();
        let count_at = bytes.len() - weights * 4 - 8;
        bytes[count_at..count_at + 8].copy_from_slice(&((weights as u64) + 1).to_le_bytes());
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(PfadError::Checkpoint(m)) if m.contains("weight count")
        ));
    }

    #[test]
    fn loaded_net_predicts_identically() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        let mut net = sample_net();
        // Give the zero-initialized head some signal first.
        for v in net.tensors_mut().into_iter().flatten() {
            if *v == 0.0 {
                *v = 0.01;
            }
        }
        let schedule = make_schedule(10, 1e-3, 0.2).unwrap();
        save_checkpoint(&path, &net, &schedule).unwrap();
        let (loaded, _) = load_checkpoint(&path).unwrap();

        use crate::denoiser::Denoiser;
        let x = crate::image::Field::from_shape_fn((16, 16), |(r, c)| {
            ((r * 16 + c) as f64 * 0.17).sin() * 0.4
        });
        let a = net.predict_noise(&x, 3).unwrap();
        let b = loaded.predict_noise(&x, 3).unwrap();
        assert_eq!(a, b);
    }
}
