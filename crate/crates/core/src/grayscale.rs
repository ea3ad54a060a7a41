//! Grayscale (and binary) morphology on scalar fields with flat structuring
//! elements.
//!
//! Boundary policy is neighborhood clipping: offsets that leave the grid are
//! ignored, so every output value is one of the input values. Padding is
//! deliberately not offered; it would inject values that do not exist in the
//! input.
//!
//! Chessboard balls take a separable sliding-window path (one monotone-deque
//! pass per axis); everything else runs the generic offset engine. Both paths
//! only ever select existing values, so they agree bit for bit.

use crate::error::{Error, Result};
use crate::grid;
use crate::image::ScalarImage;
use crate::se::{Norm, StructuringElement};

/// Neighborhood maximum: `out(x) = max { f(y) | y − x ∈ B }`.
pub fn dilate(f: &ScalarImage, se: &StructuringElement) -> Result<ScalarImage> {
    morph(f, se, true)
}

/// Neighborhood minimum: `out(x) = min { f(y) | y − x ∈ B }`.
pub fn erode(f: &ScalarImage, se: &StructuringElement) -> Result<ScalarImage> {
    morph(f, se, false)
}

/// Erosion followed by dilation with the same element.
pub fn open(f: &ScalarImage, se: &StructuringElement) -> Result<ScalarImage> {
    dilate(&erode(f, se)?, se)
}

/// Dilation followed by erosion with the same element.
pub fn close(f: &ScalarImage, se: &StructuringElement) -> Result<ScalarImage> {
    erode(&dilate(f, se)?, se)
}

fn morph(f: &ScalarImage, se: &StructuringElement, take_max: bool) -> Result<ScalarImage> {
    if se.rank() != f.shape().len() {
        return Err(Error::InvalidStructuringElement(format!(
            "SE rank {} does not match image rank {}",
            se.rank(),
            f.shape().len()
        )));
    }
    if let Some((radius, Norm::Chessboard)) = se.ball_params() {
        return Ok(separable_box(f, radius.floor() as usize, take_max));
    }
    offset_engine(f, se, take_max)
}

fn offset_engine(f: &ScalarImage, se: &StructuringElement, take_max: bool) -> Result<ScalarImage> {
    let shape = f.shape().to_vec();
    let src = f.data();
    let mut out = Vec::with_capacity(src.len());
    for idx in 0..src.len() {
        let coords = grid::coords_of(&shape, idx);
        let mut acc: Option<f64> = None;
        for &o in se.offsets() {
            if let Some(j) = grid::neighbor(&shape, coords, o) {
                let v = src[j];
                acc = Some(match acc {
                    None => v,
                    Some(a) if take_max => a.max(v),
                    Some(a) => a.min(v),
                });
            }
        }
        match acc {
            Some(v) => out.push(v),
            None => return Err(Error::EmptyNeighborhood { pixel: idx }),
        }
    }
    ScalarImage::new(shape, out)
}

/// Separable sliding-window extreme over the box `[-k, k]^d`, one axis at a
/// time. The window always contains the output pixel, so clipping never
/// empties it.
fn separable_box(f: &ScalarImage, k: usize, take_max: bool) -> ScalarImage {
    let shape = f.shape().to_vec();
    let mut data = f.data().to_vec();
    if k == 0 {
        return ScalarImage::new(shape, data).unwrap();
    }
    let rank = shape.len();
    let mut strides = vec![1usize; rank];
    for axis in (0..rank.saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * shape[axis + 1];
    }
    let total = data.len();
    let mut line = Vec::new();
    let mut line_out = Vec::new();
    for axis in 0..rank {
        let n = shape[axis];
        if n == 1 {
            continue;
        }
        let stride = strides[axis];
        // walk every line along `axis`: starts are the indices whose
        // coordinate on `axis` is zero
        for start in 0..total {
            if !(start / stride).is_multiple_of(n) {
                continue;
            }
            line.clear();
            line.extend((0..n).map(|i| data[start + i * stride]));
            sliding_extreme(&line, &mut line_out, k, take_max);
            for (i, &v) in line_out.iter().enumerate() {
                data[start + i * stride] = v;
            }
        }
    }
    ScalarImage::new(shape, data).unwrap()
}

/// `out[j] = extreme of src[max(0, j-k) ..= min(n-1, j+k)]` via a monotone
/// deque; O(n) per line.
fn sliding_extreme(src: &[f64], out: &mut Vec<f64>, k: usize, take_max: bool) {
    let n = src.len();
    out.clear();
    out.resize(n, 0.0);
    let mut dq: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for i in 0..n + k {
        if i < n {
            while let Some(&b) = dq.back() {
                let replace = if take_max {
                    src[i] >= src[b]
                } else {
                    src[i] <= src[b]
                };
                if replace {
                    dq.pop_back();
                } else {
                    break;
                }
            }
            dq.push_back(i);
        }
        if i >= k {
            let j = i - k;
            while let Some(&front) = dq.front() {
                if front + k < j {
                    dq.pop_front();
                } else {
                    break;
                }
            }
            out[j] = src[*dq.front().expect("window contains its own pixel")];
        }
    }
}
