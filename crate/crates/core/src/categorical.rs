//! Single-category morphology directly on categorical-distribution images.
//!
//! Operating on category `i`, dilation runs plain grayscale dilation on
//! channel `i` and rescales the remaining channels so each pixel still sums
//! to one, leaving the conditional probabilities among them untouched.
//! Erosion does the same except at saturated pixels (`f_i = 1`), where there
//! are no conditionals to preserve; the freed mass is then split according to
//! the nearest unsaturated neighborhood — see [`theta`].
//!
//! Per-category order: `f ≤_i g` iff channel `i` of `f` is pointwise below
//! channel `i` of `g`. Dilation and erosion are adjoint in this preorder, and
//! their compositions [`open_i`]/[`close_i`] are idempotent.
//!
//! Every operation finishes with a rebalancing pass that rescales the
//! non-operated channels so pixels sum to one again. Channel `i` is never
//! touched by the pass, so its algebraic identities hold exactly; the pass
//! returns the largest correction it applied (the `_logged` variants expose
//! it).

use crate::error::{Error, Result};
use crate::grayscale;
use crate::grid;
use crate::image::{linear_index, CategoricalImage};
use crate::se::{Norm, StructuringElement};

/// A channel counts as saturated when its probability exceeds `1 − 1e-9`;
/// exact comparison with one is too brittle after repeated rescaling.
pub const SATURATION_TOL: f64 = 1e-9;

/// Dilate category `i`. The structuring element must contain the origin
/// (balls always do); without it the rescaling of the remaining channels is
/// undefined at saturated pixels.
pub fn dilate_i(f: &CategoricalImage, i: usize, se: &StructuringElement) -> Result<CategoricalImage> {
    Ok(dilate_i_logged(f, i, se)?.0)
}

/// [`dilate_i`] plus the largest rebalancing correction applied.
pub fn dilate_i_logged(
    f: &CategoricalImage,
    i: usize,
    se: &StructuringElement,
) -> Result<(CategoricalImage, f64)> {
    check_category(f, i)?;
    check_rank(f, se)?;
    if !se.contains_origin() {
        return Err(Error::InvalidStructuringElement(
            "single-category dilation requires a structuring element containing the origin"
                .to_string(),
        ));
    }
    let dilated = grayscale::dilate(&f.channel(i)?, se)?;
    let mut out = f.clone();
    for pixel in 0..f.pixel_count() {
        let dv = dilated.data()[pixel];
        let src = f.pixel(pixel);
        let dst = out.pixel_mut(pixel);
        dst[i] = dv;
        if dv >= 1.0 - SATURATION_TOL {
            // no mass left: conditionals are undefined, set the rest to zero
            for (k, v) in dst.iter_mut().enumerate() {
                if k != i {
                    *v = 0.0;
                }
            }
        } else {
            // origin in SE gives dv >= f_i, so the divisor stays away from 0
            let scale = (1.0 - dv) / (1.0 - src[i]);
            for (k, v) in dst.iter_mut().enumerate() {
                if k != i {
                    *v = scale * src[k];
                }
            }
        }
    }
    let drift = rebalance(&mut out, i, None, None);
    debug_assert!(out.validate(1e-6).is_ok());
    Ok((out, drift))
}

/// Erode category `i`.
///
/// Works with any structuring element until a saturated pixel with an
/// unsaturated neighborhood turns up; splitting that pixel's freed mass needs
/// the radius ladder of a ball element, so other elements are rejected at
/// that point.
pub fn erode_i(f: &CategoricalImage, i: usize, se: &StructuringElement) -> Result<CategoricalImage> {
    Ok(erode_i_logged(f, i, se)?.0)
}

/// [`erode_i`] plus the largest rebalancing correction applied.
pub fn erode_i_logged(
    f: &CategoricalImage,
    i: usize,
    se: &StructuringElement,
) -> Result<(CategoricalImage, f64)> {
    check_category(f, i)?;
    check_rank(f, se)?;
    let eroded = grayscale::erode(&f.channel(i)?, se)?;
    let ladder = se
        .ball_params()
        .map(|(_, norm)| se.norm_groups(norm));
    let shape = f.shape().to_vec();
    let mut out = f.clone();
    for pixel in 0..f.pixel_count() {
        let ev = eroded.data()[pixel];
        let src = f.pixel(pixel);
        let fi = src[i];
        if fi < 1.0 - SATURATION_TOL {
            let scale = (1.0 - ev) / (1.0 - fi);
            let dst = out.pixel_mut(pixel);
            dst[i] = ev;
            for (k, v) in dst.iter_mut().enumerate() {
                if k != i {
                    *v = scale * src[k];
                }
            }
        } else if ev >= 1.0 - SATURATION_TOL {
            // saturated neighborhood: nothing moves
            let dst = out.pixel_mut(pixel);
            dst[i] = ev;
            for (k, v) in dst.iter_mut().enumerate() {
                if k != i {
                    *v = 0.0;
                }
            }
        } else {
            // saturated pixel, unsaturated neighborhood: split the freed
            // mass by the nearest categories
            let Some(groups) = ladder.as_deref() else {
                return Err(Error::ThetaRequiresBall { pixel });
            };
            let coords = grid::coords_of(&shape, pixel);
            let weights = ladder_weights(f, i, &shape, coords, groups)
                .ok_or(Error::ThetaContract { pixel })?;
            let wsum: f64 = weights.iter().sum();
            debug_assert!(wsum > 0.0, "ladder produced no positive weight");
            let dst = out.pixel_mut(pixel);
            dst[i] = ev;
            for (k, v) in dst.iter_mut().enumerate() {
                if k != i {
                    *v = (1.0 - ev) * weights[k] / wsum;
                }
            }
        }
    }
    let drift = rebalance(&mut out, i, None, None);
    debug_assert!(out.validate(1e-6).is_ok());
    Ok((out, drift))
}

/// Walk the radius ladder outward from `coords` until the neighborhood holds
/// a pixel with `f_i < 1`, then return the per-channel maxima over that
/// neighborhood (zero in slot `i`). `None` when the whole ladder is
/// saturated.
fn ladder_weights(
    f: &CategoricalImage,
    i: usize,
    shape: &[usize],
    coords: [usize; 3],
    groups: &[(f64, Vec<[i32; 3]>)],
) -> Option<Vec<f64>> {
    let channels = f.channels();
    let mut weights = vec![0.0f64; channels];
    let mut min_fi = f64::INFINITY;
    for (_, offsets) in groups {
        for &o in offsets {
            if let Some(j) = grid::neighbor(shape, coords, o) {
                let p = f.pixel(j);
                min_fi = min_fi.min(p[i]);
                for (k, w) in weights.iter_mut().enumerate() {
                    if k != i {
                        *w = w.max(p[k]);
                    }
                }
            }
        }
        if min_fi < 1.0 - SATURATION_TOL {
            return Some(weights);
        }
    }
    None
}

/// Mass-splitting weights for eroding category `i` through the saturated
/// pixel at `coords`: the smallest ball (in `norm`) around the pixel that
/// contains an unsaturated neighbor is found, and each other category gets
/// the maximum probability it attains inside that ball. Weights depend only
/// on that smallest ball, never on the radius the caller erodes with.
///
/// The pixel must be saturated in channel `i`; at least one weight is
/// positive on success.
pub fn theta(f: &CategoricalImage, i: usize, coords: &[usize], norm: Norm) -> Result<Vec<f64>> {
    check_category(f, i)?;
    let shape = f.shape().to_vec();
    let pixel = linear_index(&shape, coords).ok_or_else(|| Error::InvalidShape {
        shape: coords.to_vec(),
        reason: "pixel coordinates out of range".to_string(),
    })?;
    if f.pixel(pixel)[i] < 1.0 - SATURATION_TOL {
        return Err(Error::ThetaContract { pixel });
    }
    // ladder up to the image diameter in the requested norm
    let diameter_offset = {
        let mut o = [0i32; 3];
        for (axis, &e) in shape.iter().enumerate() {
            o[axis] = (e - 1) as i32;
        }
        o
    };
    let diameter = norm.of(diameter_offset).max(1.0);
    let ball = StructuringElement::ball(shape.len(), diameter, norm)?;
    let groups = ball.norm_groups(norm);
    let c = grid::coords_of(&shape, pixel);
    ladder_weights(f, i, &shape, c, &groups).ok_or(Error::ThetaContract { pixel })
}

/// Erosion of `i` followed by dilation of `i` with the same element.
pub fn open_i(f: &CategoricalImage, i: usize, se: &StructuringElement) -> Result<CategoricalImage> {
    Ok(open_i_logged(f, i, se)?.0)
}

pub fn open_i_logged(
    f: &CategoricalImage,
    i: usize,
    se: &StructuringElement,
) -> Result<(CategoricalImage, f64)> {
    let (e, d1) = erode_i_logged(f, i, se)?;
    let (o, d2) = dilate_i_logged(&e, i, se)?;
    Ok((o, d1.max(d2)))
}

/// Dilation of `i` followed by erosion of `i` with the same element.
pub fn close_i(f: &CategoricalImage, i: usize, se: &StructuringElement) -> Result<CategoricalImage> {
    Ok(close_i_logged(f, i, se)?.0)
}

pub fn close_i_logged(
    f: &CategoricalImage,
    i: usize,
    se: &StructuringElement,
) -> Result<(CategoricalImage, f64)> {
    let (d, d1) = dilate_i_logged(f, i, se)?;
    let (c, d2) = erode_i_logged(&d, i, se)?;
    Ok((c, d1.max(d2)))
}

/// Per-category preorder: true iff `f_i(x) ≤ g_i(x)` at every pixel. This is
/// reflexive and transitive but not antisymmetric — images differing only on
/// other channels compare equal both ways.
pub fn preorder_leq(f: &CategoricalImage, g: &CategoricalImage, i: usize) -> Result<bool> {
    if f.shape() != g.shape() {
        return Err(Error::ShapeMismatch {
            expected: f.shape().to_vec(),
            actual: g.shape().to_vec(),
        });
    }
    if f.channels() != g.channels() {
        return Err(Error::InvalidChannels {
            channels: g.channels(),
            reason: format!("expected {} channels", f.channels()),
        });
    }
    check_category(f, i)?;
    let channels = f.channels();
    Ok((0..f.pixel_count()).all(|p| f.data()[p * channels + i] <= g.data()[p * channels + i]))
}

/// Rescale the channels other than `pivot` (and any `frozen` ones) so each
/// pixel sums to one, leaving pivot and frozen channels bit-identical.
/// Returns the largest absolute correction. `skip` marks pixels to leave
/// untouched entirely.
pub(crate) fn rebalance(
    img: &mut CategoricalImage,
    pivot: usize,
    frozen: Option<&[bool]>,
    skip: Option<&[bool]>,
) -> f64 {
    let mut drift = 0.0f64;
    for pixel in 0..img.pixel_count() {
        if skip.is_some_and(|s| s[pixel]) {
            continue;
        }
        let p = img.pixel_mut(pixel);
        let is_free =
            |k: usize| k != pivot && !frozen.is_some_and(|fr| fr[k]);
        let mut fixed_sum = 0.0;
        for (k, v) in p.iter().enumerate() {
            if !is_free(k) {
                fixed_sum += *v;
            }
        }
        let residual = (1.0 - fixed_sum).max(0.0);
        let mut free_sum = 0.0;
        for (k, v) in p.iter_mut().enumerate() {
            if is_free(k) {
                if *v < 0.0 {
                    drift = drift.max(-*v);
                    *v = 0.0;
                }
                free_sum += *v;
            }
        }
        if free_sum > 0.0 {
            let scale = residual / free_sum;
            for (k, v) in p.iter_mut().enumerate() {
                if is_free(k) {
                    let old = *v;
                    *v = old * scale;
                    drift = drift.max((*v - old).abs());
                }
            }
        } else {
            drift = drift.max(residual);
        }
    }
    drift
}

fn check_category(f: &CategoricalImage, i: usize) -> Result<()> {
    if i >= f.channels() {
        return Err(Error::CategoryOutOfRange {
            index: i,
            channels: f.channels(),
        });
    }
    Ok(())
}

fn check_rank(f: &CategoricalImage, se: &StructuringElement) -> Result<()> {
    if se.rank() != f.shape().len() {
        return Err(Error::InvalidStructuringElement(format!(
            "SE rank {} does not match image rank {}",
            se.rank(),
            f.shape().len()
        )));
    }
    Ok(())
}
