//! Ideal binary band filters along one axis of a centered spectrum.
//!
//! A filter keeps or zeroes whole rows (or columns) of k-space according to
//! the magnitude of their angular frequency; there is no taper. Low-pass
//! keeps `|k| <= cutoff` (the boundary bin belongs to the low band),
//! high-pass keeps `|k| > cutoff`, so a complementary pair partitions every
//! bin exactly once and summing the two filtered spectra reproduces the
//! input bit for bit.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{PfadError, Result};
use crate::kspace::{axis_frequencies, KSpaceGrid};

/// Which band the filter keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    LowPass,
    HighPass,
}

/// Ideal band selector along one axis (0 = rows / height, 1 = columns /
/// width). The cutoff is an angular frequency in `(0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyFilter {
    kind: FilterKind,
    cutoff: f64,
    axis: usize,
}

/// Validates and builds a filter. Rejects non-finite cutoffs, cutoffs
/// outside `(0, pi]`, and axes other than 0 or 1.
pub fn make_filter(kind: FilterKind, cutoff: f64, axis: usize) -> Result<FrequencyFilter> {
    if !cutoff.is_finite() || cutoff <= 0.0 || cutoff > std::f64::consts::PI {
        return Err(PfadError::InvalidParam {
            name: "cutoff",
            reason: format!("{cutoff} not in (0, pi]"),
        });
    }
    if axis > 1 {
        return Err(PfadError::InvalidParam {
            name: "axis",
            reason: format!("{axis} is not a 2-D axis"),
        });
    }
    Ok(FrequencyFilter { kind, cutoff, axis })
}

impl FrequencyFilter {
    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    /// The filter keeping exactly the bins this one rejects.
    pub fn complement(&self) -> FrequencyFilter {
        FrequencyFilter {
            kind: match self.kind {
                FilterKind::LowPass => FilterKind::HighPass,
                FilterKind::HighPass => FilterKind::LowPass,
            },
            ..*self
        }
    }

    /// Whether a single angular frequency passes.
    pub fn passes(&self, k: f64) -> bool {
        match self.kind {
            FilterKind::LowPass => k.abs() <= self.cutoff,
            FilterKind::HighPass => k.abs() > self.cutoff,
        }
    }

    /// Pass/reject decision for every centered index along an axis of
    /// length `len`.
    pub fn axis_mask(&self, len: usize) -> Vec<bool> {
        axis_frequencies(len)
            .into_iter()
            .map(|k| self.passes(k))
            .collect()
    }
}

/// Applies the filter by zeroing rejected lines. Kept coefficients are
/// copied untouched, so complementary filters recombine exactly.
pub fn apply_filter(filter: &FrequencyFilter, grid: &KSpaceGrid) -> KSpaceGrid {
    let (h, w) = grid.dims();
    let pass = filter.axis_mask(if filter.axis == 0 { h } else { w });
    let data = Array2::from_shape_fn((h, w), |(r, c)| {
        let line = if filter.axis == 0 { r } else { c };
        if pass[line] {
            grid.data()[[r, c]]
        } else {
            Complex64::default()
        }
    });
    KSpaceGrid::new(data).expect("filtered grid keeps its shape")
}

/// A matched low/high pair sharing one cutoff and axis.
#[derive(Debug, Clone, Copy)]
pub struct FilterPair {
    pub low: FrequencyFilter,
    pub high: FrequencyFilter,
}

impl FilterPair {
    /// Builds the complementary pair used by the dual-domain purifier.
    pub fn complementary(cutoff: f64, axis: usize) -> Result<Self> {
        let low = make_filter(FilterKind::LowPass, cutoff, axis)?;
        Ok(Self {
            high: low.complement(),
            low,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Image;
    use crate::kspace::dft2;
    use std::f64::consts::PI;

    fn busy_image(h: usize, w: usize) -> Image {
        Image::from_fn(h, w, |r, c| {
            (0.5 + 0.3 * (r as f64 * 0.7).sin() + 0.2 * (c as f64 * 1.3).cos()).clamp(0.0, 1.0)
        })
        .unwrap()
    }

    #[test]
    fn low_pass_row_count_at_pi_over_ten() {
        // 256 rows, cutoff pi/10: |i - 128| <= 12.8 keeps rows 116..=140.
        let f = make_filter(FilterKind::LowPass, PI / 10.0, 0).unwrap();
        let kept = f.axis_mask(256).iter().filter(|&&p| p).count();
        assert_eq!(kept, 25);
    }

    #[test]
    fn complementary_pair_partitions_every_bin() {
        let pair = FilterPair::complementary(PI / 10.0, 0).unwrap();
        let grid = dft2(&busy_image(32, 24));
        let low = apply_filter(&pair.low, &grid);
        let high = apply_filter(&pair.high, &grid);
        for ((l, h), orig) in low
            .data()
            .iter()
            .zip(high.data().iter())
            .zip(grid.data().iter())
        {
            // Each bin survives in exactly one band, bit for bit.
            assert!(*l == Complex64::default() || *h == Complex64::default());
            assert_eq!(l + h, *orig);
        }
    }

    #[test]
    fn boundary_bin_goes_to_low_pass() {
        // Cutoff placed exactly on a bin frequency: that bin must pass low
        // and be rejected by high.
        let k = axis_frequencies(16);
        let cutoff = k[12]; // a positive bin frequency, exactly representable
        let pair = FilterPair::complementary(cutoff, 0).unwrap();
        assert!(pair.low.passes(k[12]));
        assert!(!pair.high.passes(k[12]));
        assert!(pair.low.passes(-k[12]));
    }

    #[test]
    fn filtering_is_idempotent() {
        let f = make_filter(FilterKind::HighPass, 1.0, 0).unwrap();
        let grid = dft2(&busy_image(20, 20));
        let once = apply_filter(&f, &grid);
        let twice = apply_filter(&f, &once);
        assert_eq!(once.data(), twice.data());
    }

    #[test]
    fn action_is_confined_to_the_chosen_axis() {
        let grid = dft2(&busy_image(16, 12));
        let f_rows = make_filter(FilterKind::LowPass, 0.9, 0).unwrap();
        let filtered = apply_filter(&f_rows, &grid);
        let pass = f_rows.axis_mask(16);
        for (r, row) in filtered.data().rows().into_iter().enumerate() {
            if pass[r] {
                // Whole row untouched...
                for (z, orig) in row.iter().zip(grid.data().row(r)) {
                    assert_eq!(z, orig);
                }
            } else {
                // ...or zeroed, regardless of the column.
                assert!(row.iter().all(|z| *z == Complex64::default()));
            }
        }
    }

    #[test]
    fn column_axis_filters_columns() {
        let grid = dft2(&busy_image(10, 14));
        let f_cols = make_filter(FilterKind::HighPass, 2.0, 1).unwrap();
        let filtered = apply_filter(&f_cols, &grid);
        let pass = f_cols.axis_mask(14);
        for c in 0..14 {
            let col = filtered.data().column(c);
            if !pass[c] {
                assert!(col.iter().all(|z| *z == Complex64::default()));
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_filter(FilterKind::LowPass, 0.0, 0).is_err());
        assert!(make_filter(FilterKind::LowPass, PI + 1e-9, 0).is_err());
        assert!(make_filter(FilterKind::LowPass, f64::NAN, 0).is_err());
        assert!(make_filter(FilterKind::LowPass, 1.0, 2).is_err());
        // pi itself is a legal cutoff (all-pass low / empty high).
        assert!(make_filter(FilterKind::HighPass, PI, 1).is_ok());
    }
}
