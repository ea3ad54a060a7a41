//! Morphology on Dirichlet parameter images: plain grayscale operations
//! applied to each channel independently, with variants that update only a
//! subset of channels. Parameters are never rescaled, so positivity is
//! preserved by construction (maxima and minima of positive values).

use crate::error::{Error, Result};
use crate::grayscale;
use crate::image::DirichletImage;
use crate::se::StructuringElement;

pub fn dilate(f: &DirichletImage, se: &StructuringElement) -> Result<DirichletImage> {
    per_channel(f, se, &all_channels(f), grayscale::dilate)
}

pub fn erode(f: &DirichletImage, se: &StructuringElement) -> Result<DirichletImage> {
    per_channel(f, se, &all_channels(f), grayscale::erode)
}

pub fn open(f: &DirichletImage, se: &StructuringElement) -> Result<DirichletImage> {
    dilate(&erode(f, se)?, se)
}

pub fn close(f: &DirichletImage, se: &StructuringElement) -> Result<DirichletImage> {
    erode(&dilate(f, se)?, se)
}

/// Dilate only the channels in `subset`; the rest are copied verbatim.
/// An empty subset is the identity.
pub fn dilate_subset(
    f: &DirichletImage,
    se: &StructuringElement,
    subset: &[usize],
) -> Result<DirichletImage> {
    per_channel(f, se, subset, grayscale::dilate)
}

pub fn erode_subset(
    f: &DirichletImage,
    se: &StructuringElement,
    subset: &[usize],
) -> Result<DirichletImage> {
    per_channel(f, se, subset, grayscale::erode)
}

pub fn open_subset(
    f: &DirichletImage,
    se: &StructuringElement,
    subset: &[usize],
) -> Result<DirichletImage> {
    dilate_subset(&erode_subset(f, se, subset)?, se, subset)
}

pub fn close_subset(
    f: &DirichletImage,
    se: &StructuringElement,
    subset: &[usize],
) -> Result<DirichletImage> {
    erode_subset(&dilate_subset(f, se, subset)?, se, subset)
}

fn all_channels(f: &DirichletImage) -> Vec<usize> {
    (0..f.channels()).collect()
}

fn per_channel(
    f: &DirichletImage,
    se: &StructuringElement,
    subset: &[usize],
    op: fn(&crate::image::ScalarImage, &StructuringElement) -> Result<crate::image::ScalarImage>,
) -> Result<DirichletImage> {
    for &k in subset {
        if k >= f.channels() {
            return Err(Error::CategoryOutOfRange {
                index: k,
                channels: f.channels(),
            });
        }
    }
    let channels = f.channels();
    let mut out = DirichletImage::from_raw(f.shape().to_vec(), channels, f.data().to_vec());
    let mut done = vec![false; channels];
    for &k in subset {
        if done[k] {
            continue;
        }
        done[k] = true;
        let field = op(&f.channel(k)?, se)?;
        let data = out.data_mut();
        for (pixel, &v) in field.data().iter().enumerate() {
            data[pixel * channels + k] = v;
        }
    }
    Ok(out)
}
