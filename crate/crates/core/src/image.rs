//! Image value types.
//!
//! All images are dense row-major arrays (last axis fastest, channels
//! innermost for multi-channel data) over grids of rank 1, 2 or 3. Values are
//! immutable in normal use: operations return new images, so sharing across
//! threads is safe.
//!
//! * [`CategoricalImage`] — one probability vector per pixel (a point on the
//!   probability simplex). The central type.
//! * [`DirichletImage`] — one strictly positive parameter vector per pixel.
//! * [`LabelImage`] — one symbol per pixel: a category, "no category"
//!   ([`Label::Bottom`]) or "conflicting categories" ([`Label::Top`]).
//! * [`SetImage`] — one category set per pixel, packed into 64-bit masks.
//! * [`ScalarImage`] — one real per pixel; the field the per-channel
//!   operations work on.

use crate::error::{Error, Result};
use crate::grid;

/// Default tolerance for the per-pixel simplex check: channel values may be
/// negative by at most this much and sums may differ from one by at most this
/// much.
pub const SIMPLEX_TOL: f64 = 1e-6;

/// Convert pixel coordinates to a linear row-major index.
pub fn linear_index(shape: &[usize], coords: &[usize]) -> Option<usize> {
    if coords.len() != shape.len() {
        return None;
    }
    let mut c = [0usize; 3];
    for (axis, (&v, &e)) in coords.iter().zip(shape).enumerate() {
        if v >= e {
            return None;
        }
        c[axis] = v;
    }
    Some(grid::index_of(shape, c))
}

/// A scalar field over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarImage {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl ScalarImage {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        grid::check_shape(&shape).map_err(|reason| Error::InvalidShape {
            shape: shape.clone(),
            reason,
        })?;
        let expected = grid::pixel_count(&shape);
        if data.len() != expected {
            return Err(Error::DataLength {
                expected,
                actual: data.len(),
            });
        }
        Ok(ScalarImage { shape, data })
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Result<Self> {
        let n = grid::pixel_count(&shape);
        ScalarImage::new(shape, vec![value; n])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn pixel_count(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }
}

/// An image of categorical distributions: per pixel, `channels` probabilities
/// that are nonnegative and sum to one within [`SIMPLEX_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalImage {
    shape: Vec<usize>,
    channels: usize,
    data: Vec<f64>,
}

impl CategoricalImage {
    /// Build and validate. Rejects malformed shapes, fewer than two channels,
    /// and pixels that violate the simplex constraint beyond [`SIMPLEX_TOL`].
    pub fn new(shape: Vec<usize>, channels: usize, data: Vec<f64>) -> Result<Self> {
        let img = Self::from_raw(shape, channels, data)?;
        img.validate(SIMPLEX_TOL)?;
        Ok(img)
    }

    /// Build without the simplex check. Structural invariants still hold.
    pub(crate) fn from_raw(shape: Vec<usize>, channels: usize, data: Vec<f64>) -> Result<Self> {
        grid::check_shape(&shape).map_err(|reason| Error::InvalidShape {
            shape: shape.clone(),
            reason,
        })?;
        if channels < 2 {
            return Err(Error::InvalidChannels {
                channels,
                reason: "categorical images need at least 2 channels".to_string(),
            });
        }
        let expected = grid::pixel_count(&shape) * channels;
        if data.len() != expected {
            return Err(Error::DataLength {
                expected,
                actual: data.len(),
            });
        }
        Ok(CategoricalImage {
            shape,
            channels,
            data,
        })
    }

    /// Constant image with the given pixel value.
    pub fn filled(shape: Vec<usize>, pixel: &[f64]) -> Result<Self> {
        let n = grid::pixel_count(&shape);
        let mut data = Vec::with_capacity(n * pixel.len());
        for _ in 0..n {
            data.extend_from_slice(pixel);
        }
        CategoricalImage::new(shape, pixel.len(), data)
    }

    /// Embed a plain label image as one-hot probability vectors.
    ///
    /// Sentinel labels and labels `>= channels` are rejected.
    pub fn one_hot(labels: &LabelImage, channels: usize) -> Result<Self> {
        if channels < 2 {
            return Err(Error::InvalidChannels {
                channels,
                reason: "categorical images need at least 2 channels".to_string(),
            });
        }
        let n = labels.pixel_count();
        let mut data = vec![0.0; n * channels];
        for (pixel, &label) in labels.data().iter().enumerate() {
            match label {
                Label::Cat(k) if (k as usize) < channels => {
                    data[pixel * channels + k as usize] = 1.0;
                }
                Label::Cat(k) => {
                    return Err(Error::LabelOutOfRange {
                        pixel,
                        label: k,
                        channels,
                    })
                }
                Label::Bottom | Label::Top => return Err(Error::SentinelLabel { pixel }),
            }
        }
        CategoricalImage::from_raw(labels.shape().to_vec(), channels, data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.data.len() / self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, idx: usize) -> &[f64] {
        &self.data[idx * self.channels..(idx + 1) * self.channels]
    }

    pub(crate) fn pixel_mut(&mut self, idx: usize) -> &mut [f64] {
        &mut self.data[idx * self.channels..(idx + 1) * self.channels]
    }

    /// First pixel violating the simplex constraint, with its defect
    /// magnitude: the larger of the sum deviation and the worst negative
    /// excursion.
    pub fn first_violation(&self, tol: f64) -> Option<(usize, f64)> {
        for pixel in 0..self.pixel_count() {
            let p = self.pixel(pixel);
            let mut sum = 0.0;
            let mut worst_neg = 0.0f64;
            for &v in p {
                if !v.is_finite() {
                    return Some((pixel, f64::INFINITY));
                }
                sum += v;
                if v < 0.0 {
                    worst_neg = worst_neg.max(-v);
                }
            }
            let defect = (sum - 1.0).abs().max(worst_neg);
            if defect > tol {
                return Some((pixel, defect));
            }
        }
        None
    }

    /// Check every pixel against the simplex constraint.
    pub fn validate(&self, tol: f64) -> Result<()> {
        match self.first_violation(tol) {
            None => Ok(()),
            Some((pixel, defect)) => Err(Error::SimplexViolation { pixel, defect }),
        }
    }

    /// Per-pixel index of the largest channel; ties break to the lowest
    /// channel index.
    pub fn argmax_labels(&self) -> LabelImage {
        let mut out = Vec::with_capacity(self.pixel_count());
        for pixel in 0..self.pixel_count() {
            let p = self.pixel(pixel);
            let mut best = 0usize;
            for (k, &v) in p.iter().enumerate().skip(1) {
                if v > p[best] {
                    best = k;
                }
            }
            out.push(Label::Cat(best as u32));
        }
        LabelImage {
            shape: self.shape.clone(),
            categories: self.channels,
            data: out,
        }
    }

    /// Per-pixel Shannon entropy in nats, with `0·ln 0 = 0`.
    pub fn entropy_map(&self) -> ScalarImage {
        let mut out = Vec::with_capacity(self.pixel_count());
        for pixel in 0..self.pixel_count() {
            let h: f64 = self
                .pixel(pixel)
                .iter()
                .map(|&p| if p > 0.0 { -p * p.ln() } else { 0.0 })
                .sum();
            out.push(h);
        }
        ScalarImage {
            shape: self.shape.clone(),
            data: out,
        }
    }

    /// Copy of one channel as a scalar field.
    pub fn channel(&self, k: usize) -> Result<ScalarImage> {
        if k >= self.channels {
            return Err(Error::CategoryOutOfRange {
                index: k,
                channels: self.channels,
            });
        }
        let data = (0..self.pixel_count())
            .map(|pixel| self.data[pixel * self.channels + k])
            .collect();
        Ok(ScalarImage {
            shape: self.shape.clone(),
            data,
        })
    }

    /// Clamp tiny negatives to zero and rescale each pixel to sum to one.
    /// Returns the largest absolute correction applied to any channel.
    pub fn renormalize(&mut self) -> f64 {
        let channels = self.channels;
        let mut drift = 0.0f64;
        for pixel in 0..self.pixel_count() {
            let p = &mut self.data[pixel * channels..(pixel + 1) * channels];
            let mut sum = 0.0;
            for v in p.iter_mut() {
                if *v < 0.0 {
                    drift = drift.max(-*v);
                    *v = 0.0;
                }
                sum += *v;
            }
            if sum > 0.0 && sum != 1.0 {
                for v in p.iter_mut() {
                    let old = *v;
                    *v = old / sum;
                    drift = drift.max((*v - old).abs());
                }
            }
        }
        drift
    }
}

/// An image of Dirichlet parameter vectors: strictly positive and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletImage {
    shape: Vec<usize>,
    channels: usize,
    data: Vec<f64>,
}

impl DirichletImage {
    pub fn new(shape: Vec<usize>, channels: usize, data: Vec<f64>) -> Result<Self> {
        grid::check_shape(&shape).map_err(|reason| Error::InvalidShape {
            shape: shape.clone(),
            reason,
        })?;
        if channels < 2 {
            return Err(Error::InvalidChannels {
                channels,
                reason: "Dirichlet images need at least 2 channels".to_string(),
            });
        }
        let expected = grid::pixel_count(&shape) * channels;
        if data.len() != expected {
            return Err(Error::DataLength {
                expected,
                actual: data.len(),
            });
        }
        for (i, &v) in data.iter().enumerate() {
            if v.is_nan() || v <= 0.0 || !v.is_finite() {
                return Err(Error::NonPositiveParameter {
                    pixel: i / channels,
                    channel: i % channels,
                    value: v,
                });
            }
        }
        Ok(DirichletImage {
            shape,
            channels,
            data,
        })
    }

    pub fn filled(shape: Vec<usize>, pixel: &[f64]) -> Result<Self> {
        let n = grid::pixel_count(&shape);
        let mut data = Vec::with_capacity(n * pixel.len());
        for _ in 0..n {
            data.extend_from_slice(pixel);
        }
        DirichletImage::new(shape, pixel.len(), data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.data.len() / self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, idx: usize) -> &[f64] {
        &self.data[idx * self.channels..(idx + 1) * self.channels]
    }

    /// Expected categorical distribution: channel `k` becomes
    /// `α_k / Σ_j α_j`.
    pub fn expectation(&self) -> CategoricalImage {
        let channels = self.channels;
        let mut data = Vec::with_capacity(self.data.len());
        for pixel in 0..self.pixel_count() {
            let p = self.pixel(pixel);
            let sum: f64 = p.iter().sum();
            data.extend(p.iter().map(|&a| a / sum));
        }
        CategoricalImage {
            shape: self.shape.clone(),
            channels,
            data,
        }
    }

    /// Per-pixel Euclidean norm of the parameter vector.
    pub fn magnitude_map(&self) -> ScalarImage {
        let mut out = Vec::with_capacity(self.pixel_count());
        for pixel in 0..self.pixel_count() {
            let m: f64 = self.pixel(pixel).iter().map(|&a| a * a).sum::<f64>().sqrt();
            out.push(m);
        }
        ScalarImage {
            shape: self.shape.clone(),
            data: out,
        }
    }

    pub fn channel(&self, k: usize) -> Result<ScalarImage> {
        if k >= self.channels {
            return Err(Error::CategoryOutOfRange {
                index: k,
                channels: self.channels,
            });
        }
        let data = (0..self.pixel_count())
            .map(|pixel| self.data[pixel * self.channels + k])
            .collect();
        Ok(ScalarImage {
            shape: self.shape.clone(),
            data,
        })
    }

    pub(crate) fn from_raw(shape: Vec<usize>, channels: usize, data: Vec<f64>) -> Self {
        DirichletImage {
            shape,
            channels,
            data,
        }
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Pixel symbol of a [`LabelImage`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    /// No category.
    Bottom,
    /// A single category.
    Cat(u32),
    /// Conflicting categories.
    Top,
}

/// A crisp image: one symbol per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelImage {
    shape: Vec<usize>,
    categories: usize,
    data: Vec<Label>,
}

impl LabelImage {
    pub fn new(shape: Vec<usize>, categories: usize, data: Vec<Label>) -> Result<Self> {
        grid::check_shape(&shape).map_err(|reason| Error::InvalidShape {
            shape: shape.clone(),
            reason,
        })?;
        let expected = grid::pixel_count(&shape);
        if data.len() != expected {
            return Err(Error::DataLength {
                expected,
                actual: data.len(),
            });
        }
        for (pixel, &l) in data.iter().enumerate() {
            if let Label::Cat(k) = l {
                if k as usize >= categories {
                    return Err(Error::LabelOutOfRange {
                        pixel,
                        label: k,
                        channels: categories,
                    });
                }
            }
        }
        Ok(LabelImage {
            shape,
            categories,
            data,
        })
    }

    /// Plain category labels, no sentinels.
    pub fn from_labels(shape: Vec<usize>, categories: usize, labels: Vec<u32>) -> Result<Self> {
        let data = labels.into_iter().map(Label::Cat).collect();
        LabelImage::new(shape, categories, data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    pub fn pixel_count(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[Label] {
        &self.data
    }

    pub fn get(&self, idx: usize) -> Label {
        self.data[idx]
    }

    /// True when no pixel holds a sentinel.
    pub fn is_plain(&self) -> bool {
        self.data.iter().all(|l| matches!(l, Label::Cat(_)))
    }

    pub(crate) fn from_raw(shape: Vec<usize>, categories: usize, data: Vec<Label>) -> Self {
        LabelImage {
            shape,
            categories,
            data,
        }
    }
}

/// A crisp image whose pixels are category sets over at most 64 categories,
/// packed as bit masks.
#[derive(Debug, Clone, PartialEq)]
pub struct SetImage {
    shape: Vec<usize>,
    categories: usize,
    data: Vec<u64>,
}

impl SetImage {
    pub fn new(shape: Vec<usize>, categories: usize, data: Vec<u64>) -> Result<Self> {
        grid::check_shape(&shape).map_err(|reason| Error::InvalidShape {
            shape: shape.clone(),
            reason,
        })?;
        if categories == 0 || categories > 64 {
            return Err(Error::TooManyCategories { categories });
        }
        let expected = grid::pixel_count(&shape);
        if data.len() != expected {
            return Err(Error::DataLength {
                expected,
                actual: data.len(),
            });
        }
        let mask = Self::mask_for(categories);
        if let Some(pixel) = data.iter().position(|&s| s & !mask != 0) {
            return Err(Error::LabelOutOfRange {
                pixel,
                label: 64,
                channels: categories,
            });
        }
        Ok(SetImage {
            shape,
            categories,
            data,
        })
    }

    fn mask_for(categories: usize) -> u64 {
        if categories == 64 {
            u64::MAX
        } else {
            (1u64 << categories) - 1
        }
    }

    pub fn empty(shape: Vec<usize>, categories: usize) -> Result<Self> {
        let n = grid::pixel_count(&shape);
        SetImage::new(shape, categories, vec![0; n])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    pub fn pixel_count(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn get(&self, idx: usize) -> u64 {
        self.data[idx]
    }

    /// Mask covering every category of this image.
    pub fn full_mask(&self) -> u64 {
        Self::mask_for(self.categories)
    }

    pub(crate) fn from_raw(shape: Vec<usize>, categories: usize, data: Vec<u64>) -> Self {
        SetImage {
            shape,
            categories,
            data,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_uniform() {
        let img = CategoricalImage::filled(vec![2, 2], &[1.0 / 3.0; 3]).unwrap();
        assert!(img.validate(SIMPLEX_TOL).is_ok());
    }

    #[test]
    fn validate_reports_first_violation_and_defect() {
        let img = CategoricalImage::from_raw(vec![2], 2, vec![0.5, 0.5, 0.5, 0.6]).unwrap();
        let (pixel, defect) = img.first_violation(SIMPLEX_TOL).unwrap();
        assert_eq!(pixel, 1);
        assert!((defect - 0.1).abs() < 1e-12);
    }

    #[test]
    fn validate_tolerates_rounding_dust() {
        let img =
            CategoricalImage::from_raw(vec![1], 3, vec![1.000_000_5, -0.000_000_5, 0.0]).unwrap();
        assert!(img.validate(1e-6).is_ok());
        assert!(img.validate(1e-9).is_err());
    }

    #[test]
    fn one_hot_round_trip() {
        let labels = LabelImage::from_labels(vec![3], 3, vec![0, 2, 1]).unwrap();
        let img = CategoricalImage::one_hot(&labels, 3).unwrap();
        assert_eq!(
            img.data(),
            &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0]
        );
        assert_eq!(img.argmax_labels().data(), labels.data());
    }

    #[test]
    fn one_hot_rejects_out_of_range() {
        let labels = LabelImage::from_labels(vec![1], 4, vec![3]).unwrap();
        assert!(matches!(
            CategoricalImage::one_hot(&labels, 3),
            Err(Error::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn one_hot_rejects_sentinels() {
        let labels = LabelImage::new(vec![1], 2, vec![Label::Top]).unwrap();
        assert!(matches!(
            CategoricalImage::one_hot(&labels, 2),
            Err(Error::SentinelLabel { .. })
        ));
    }

    #[test]
    fn argmax_breaks_ties_low() {
        let img = CategoricalImage::new(vec![2], 2, vec![0.5, 0.5, 0.2, 0.8]).unwrap();
        assert_eq!(
            img.argmax_labels().data(),
            &[Label::Cat(0), Label::Cat(1)]
        );
    }

    #[test]
    fn expectation_matches_hand_values() {
        let img = DirichletImage::new(vec![2], 3, vec![1.0, 1.0, 1.0, 2.0, 1.0, 1.0]).unwrap();
        let e = img.expectation();
        let third = 1.0 / 3.0;
        assert!((e.pixel(0)[0] - third).abs() < 1e-15);
        assert_eq!(e.pixel(1), &[0.5, 0.25, 0.25]);
        assert!(e.validate(1e-9).is_ok());
    }

    #[test]
    fn expectation_reaches_simplex_boundary() {
        let img = DirichletImage::new(vec![1], 2, vec![1e-6, 1.0]).unwrap();
        let e = img.expectation();
        assert!((e.pixel(0)[0] - 1e-6).abs() < 1e-9);
        assert!((e.pixel(0)[1] - (1.0 - 1e-6)).abs() < 1e-9);
    }

    #[test]
    fn entropy_hand_values() {
        let img = CategoricalImage::new(
            vec![3],
            2,
            vec![1.0, 0.0, 0.5, 0.5, 0.25, 0.75],
        )
        .unwrap();
        let h = img.entropy_map();
        assert_eq!(h.data()[0], 0.0);
        assert!((h.data()[1] - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(h.data()[2] > 0.0 && h.data()[2] < std::f64::consts::LN_2);
    }

    #[test]
    fn entropy_max_at_uniform() {
        let img = CategoricalImage::filled(vec![1], &[1.0 / 3.0; 3]).unwrap();
        assert!((img.entropy_map().data()[0] - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn magnitude_hand_values() {
        let img = DirichletImage::new(vec![2], 2, vec![3.0, 4.0, 1.0, 1.0]).unwrap();
        let m = img.magnitude_map();
        assert_eq!(m.data()[0], 5.0);
        assert!((m.data()[1] - 2f64.sqrt()).abs() < 1e-15);
        let img3 = DirichletImage::new(vec![1], 3, vec![2.0, 1.0, 1.0]).unwrap();
        assert!((img3.magnitude_map().data()[0] - 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_rejects_nonpositive() {
        assert!(DirichletImage::new(vec![1], 2, vec![0.0, 1.0]).is_err());
        assert!(DirichletImage::new(vec![1], 2, vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn set_image_rejects_stray_bits() {
        assert!(SetImage::new(vec![1], 2, vec![0b100]).is_err());
        assert!(SetImage::new(vec![1], 65, vec![0]).is_err());
        assert!(SetImage::new(vec![1], 2, vec![0b11]).is_ok());
    }

    #[test]
    fn renormalize_reports_drift() {
        let mut img = CategoricalImage::from_raw(vec![1], 2, vec![0.6, 0.6]).unwrap();
        let drift = img.renormalize();
        assert_eq!(img.pixel(0), &[0.5, 0.5]);
        assert!((drift - 0.1).abs() < 1e-12);
    }
}
