//! Image file I/O: 16-bit grayscale PNG for interchange and a raw
//! float32 format ("PFIM") for lossless intermediates.
//!
//! PNG emission quantizes [0,1] pixels to 1/65535 steps; that is the only
//! place quantization happens. The PFIM layout is an 8-byte header —
//! magic `PFIM`, then height and width as little-endian u16 — followed by
//! row-major little-endian f32 samples.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, Luma};

use crate::error::{PfadError, Result};
use crate::image::Image;

const PFIM_MAGIC: &[u8; 4] = b"PFIM";

/// Writes `img` as a 16-bit grayscale PNG.
pub fn save_png16(path: &Path, img: &Image) -> Result<()> {
    let (h, w) = img.dims();
    let data = img.data();
    let buf: Vec<u16> = data
        .iter()
        .map(|&v| (v * 65535.0).round().clamp(0.0, 65535.0) as u16)
        .collect();
    let png: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(w as u32, h as u32, buf).expect("buffer sized from image dims");
    let mut file = BufWriter::new(File::create(path)?);
    DynamicImage::ImageLuma16(png)
        .write_to(&mut file, image::ImageOutputFormat::Png)
        .map_err(|e| PfadError::ImageFile(format!("{}: {e}", path.display())))?;
    file.flush()?;
    Ok(())
}

/// Snaps every pixel to the value it would carry after a PNG save/load
/// round trip. Deriving downstream artifacts from the snapped image
/// keeps them reproducible from the files on disk alone.
pub fn png16_quantize(img: &Image) -> Result<Image> {
    let (h, w) = img.dims();
    let data = img.data();
    Image::from_fn(h, w, |r, c| {
        (data[[r, c]] * 65535.0).round().clamp(0.0, 65535.0) / 65535.0
    })
}

/// Reads a grayscale PNG (8- or 16-bit) back into a [0,1] image.
pub fn load_png16(path: &Path) -> Result<Image> {
    let decoded = image::open(path)
        .map_err(|e| PfadError::ImageFile(format!("{}: {e}", path.display())))?
        .to_luma16();
    let (w, h) = decoded.dimensions();
    Image::from_fn(h as usize, w as usize, |r, c| {
        f64::from(decoded.get_pixel(c as u32, r as u32).0[0]) / 65535.0
    })
}

/// Writes `img` in the raw float format.
pub fn save_pfim(path: &Path, img: &Image) -> Result<()> {
    let (h, w) = img.dims();
    if h > u16::MAX as usize || w > u16::MAX as usize {
        return Err(PfadError::ImageFile(format!(
            "{h}x{w} exceeds the u16 header range"
        )));
    }
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(PFIM_MAGIC)?;
    out.write_all(&(h as u16).to_le_bytes())?;
    out.write_all(&(w as u16).to_le_bytes())?;
    for &v in img.data().iter() {
        out.write_all(&(v as f32).to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a raw float image written by [`save_pfim`].
pub fn load_pfim(path: &Path) -> Result<Image> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0_u8; 8];
    r.read_exact(&mut header)
        .map_err(|_| PfadError::ImageFile(format!("{}: truncated header", path.display())))?;
    if &header[..4] != PFIM_MAGIC {
        return Err(PfadError::ImageFile(format!(
            "{}: bad magic, not a raw float image",
            path.display()
        )));
    }
    let h = u16::from_le_bytes([header[4], header[5]]) as usize;
    let w = u16::from_le_bytes([header[6], header[7]]) as usize;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != h * w * 4 {
        return Err(PfadError::ImageFile(format!(
            "{}: payload is {} bytes, header promises {}",
            path.display(),
            payload.len(),
            h * w * 4
        )));
    }
    let mut samples = payload
        .chunks_exact(4)
        .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])));
    Image::from_fn(h, w, |_, _| samples.next().expect("length checked"))
}

/// Loads a clean or intermediate image by extension (`.png` or `.pfim`).
pub fn load_image(path: &Path) -> Result<Image> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("png") => load_png16(path),
        Some("pfim") => load_pfim(path),
        _ => Err(PfadError::ImageFile(format!(
            "{}: unsupported extension (expected .png or .pfim)",
            path.display()
        ))),
    }
}

/// All loadable images directly inside `dir`, sorted by filename.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if matches!(
            path.extension().and_then(|e| e.to_str()),
            Some("png") | Some("pfim")
        ) {
            found.push(path);
        }
    }
    found.sort();
    Ok(found)
}
