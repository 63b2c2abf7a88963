//! Real-valued rasters.
//!
//! [`Image`] is the validated currency of the pipeline: finite samples in
//! `[0, 1]`, non-empty, row-major. Intermediate math (diffusion latents,
//! reconstruction magnitudes) lives in plain [`Field`]s, which carry no
//! range guarantee; clamping back into an `Image` happens only when a
//! result is actually emitted.

use ndarray::Array2;

use crate::error::{PfadError, Result};

/// Unconstrained real raster used for intermediate values.
pub type Field = Array2<f64>;

/// A grayscale image: finite `f64` samples in `[0, 1]`, at least 1x1.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    data: Array2<f64>,
}

impl Image {
    /// Wraps a raster, rejecting empty shapes, NaN/inf, and out-of-range
    /// samples.
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (h, w) = data.dim();
        if h == 0 || w == 0 {
            return Err(PfadError::InvalidPixels(format!("empty shape {h}x{w}")));
        }
        for (idx, &v) in data.indexed_iter() {
            if !v.is_finite() {
                return Err(PfadError::InvalidPixels(format!(
                    "non-finite sample {v} at {idx:?}"
                )));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(PfadError::InvalidPixels(format!(
                    "sample {v} at {idx:?} outside [0, 1]"
                )));
            }
        }
        Ok(Self { data })
    }

    /// Builds an image by evaluating `f(row, col)`; same validation as
    /// [`Image::new`].
    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        Self::new(Array2::from_shape_fn((height, width), |(r, c)| f(r, c)))
    }

    /// All-zero image.
    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::new(Array2::zeros((height, width)))
    }

    /// Clamps an arbitrary field into `[0, 1]`. Non-finite samples are an
    /// error rather than silently squashed.
    pub fn from_field_clamped(field: &Field) -> Result<Self> {
        let (h, w) = field.dim();
        if h == 0 || w == 0 {
            return Err(PfadError::InvalidPixels(format!("empty shape {h}x{w}")));
        }
        let mut data = field.clone();
        for v in data.iter_mut() {
            if !v.is_finite() {
                return Err(PfadError::InvalidPixels(format!("non-finite sample {v}")));
            }
            *v = v.clamp(0.0, 1.0);
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

    /// Read access to the underlying raster.
    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    /// Copies the samples out as an unconstrained field.
    pub fn to_field(&self) -> Field {
        self.data.clone()
    }

    /// Consumes the image, returning the raster.
    pub fn into_data(self) -> Array2<f64> {
        self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_valid_range() {
        let img = Image::from_fn(4, 3, |r, c| (r as f64 * 3.0 + c as f64) / 11.0).unwrap();
        assert_eq!(img.dims(), (4, 3));
        assert_eq!(img.data()[[3, 2]], 1.0);
    }

    #[test]
    fn rejects_out_of_range() {
        let arr = Array2::from_elem((2, 2), 1.5);
        assert!(matches!(Image::new(arr), Err(PfadError::InvalidPixels(_))));
    }

    #[test]
    fn rejects_nan() {
        let mut arr = Array2::zeros((2, 2));
        arr[[0, 1]] = f64::NAN;
        assert!(Image::new(arr).is_err());
    }

    #[test]
    fn rejects_empty() {
        let arr: Array2<f64> = Array2::zeros((0, 4));
        assert!(Image::new(arr).is_err());
    }

    #[test]
    fn clamp_squashes_overshoot_but_not_nan() {
        let mut f: Field = Array2::from_elem((2, 2), -0.25);
        f[[1, 1]] = 1.75;
        let img = Image::from_field_clamped(&f).unwrap();
        assert_eq!(img.data()[[0, 0]], 0.0);
        assert_eq!(img.data()[[1, 1]], 1.0);

        f[[0, 0]] = f64::INFINITY;
        assert!(Image::from_field_clamped(&f).is_err());
    }
}
