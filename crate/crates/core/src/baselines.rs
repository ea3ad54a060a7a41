//! Crisp categorical morphologies: set-valued pixels, label images with
//! no-category/conflict sentinels, and single-category operations on plain
//! label images.
//!
//! Neighborhoods follow the same `y − x ∈ B` convention as the grayscale
//! module. Where a clipped neighborhood is empty (structuring element without
//! the origin at the image border), set and label operations fall back to the
//! lattice identity of the empty supremum/infimum instead of erroring.

use crate::error::{Error, Result};
use crate::grid;
use crate::image::{Label, LabelImage, SetImage};
use crate::se::{Norm, StructuringElement};

/// Pixelwise union over the neighborhood.
pub fn set_dilate(f: &SetImage, se: &StructuringElement) -> Result<SetImage> {
    set_morph(f, se, true)
}

/// Pixelwise intersection over the neighborhood.
pub fn set_erode(f: &SetImage, se: &StructuringElement) -> Result<SetImage> {
    set_morph(f, se, false)
}

fn set_morph(f: &SetImage, se: &StructuringElement, union: bool) -> Result<SetImage> {
    check_rank(f.shape(), se)?;
    let shape = f.shape().to_vec();
    let full = f.full_mask();
    let mut out = Vec::with_capacity(f.pixel_count());
    for idx in 0..f.pixel_count() {
        let coords = grid::coords_of(&shape, idx);
        let mut acc = if union { 0u64 } else { full };
        for &o in se.offsets() {
            if let Some(j) = grid::neighbor(&shape, coords, o) {
                if union {
                    acc |= f.get(j);
                } else {
                    acc &= f.get(j);
                }
            }
        }
        out.push(acc);
    }
    Ok(SetImage::from_raw(shape, f.categories(), out))
}

/// Label dilation: conflict dominates, a single category propagates,
/// otherwise no category.
pub fn label_dilate(f: &LabelImage, se: &StructuringElement) -> Result<LabelImage> {
    label_morph(f, se, true)
}

/// Label erosion: dual case analysis with the sentinels swapped.
pub fn label_erode(f: &LabelImage, se: &StructuringElement) -> Result<LabelImage> {
    label_morph(f, se, false)
}

fn label_morph(f: &LabelImage, se: &StructuringElement, dilating: bool) -> Result<LabelImage> {
    check_rank(f.shape(), se)?;
    let shape = f.shape().to_vec();
    let mut out = Vec::with_capacity(f.pixel_count());
    for idx in 0..f.pixel_count() {
        let coords = grid::coords_of(&shape, idx);
        let mut saw_top = false;
        let mut saw_bottom = false;
        let mut cat: Option<u32> = None;
        let mut conflict = false;
        for &o in se.offsets() {
            if let Some(j) = grid::neighbor(&shape, coords, o) {
                match f.get(j) {
                    Label::Top => saw_top = true,
                    Label::Bottom => saw_bottom = true,
                    Label::Cat(c) => match cat {
                        None => cat = Some(c),
                        Some(prev) if prev != c => conflict = true,
                        Some(_) => {}
                    },
                }
            }
        }
        let value = if dilating {
            if saw_top || conflict {
                Label::Top
            } else if let Some(c) = cat {
                Label::Cat(c)
            } else {
                Label::Bottom
            }
        } else if saw_bottom || conflict {
            Label::Bottom
        } else if let Some(c) = cat {
            Label::Cat(c)
        } else {
            Label::Top
        };
        out.push(value);
    }
    Ok(LabelImage::from_raw(shape, f.categories(), out))
}

/// Single-category dilation on a plain label image: a pixel becomes `i` when
/// any neighbor carries `i`, and is untouched otherwise.
pub fn nary_dilate(f: &LabelImage, i: u32, se: &StructuringElement) -> Result<LabelImage> {
    check_rank(f.shape(), se)?;
    check_plain(f)?;
    check_category(f, i)?;
    let shape = f.shape().to_vec();
    let mut out = Vec::with_capacity(f.pixel_count());
    for idx in 0..f.pixel_count() {
        let coords = grid::coords_of(&shape, idx);
        let hit = se
            .offsets()
            .iter()
            .filter_map(|&o| grid::neighbor(&shape, coords, o))
            .any(|j| f.get(j) == Label::Cat(i));
        out.push(if hit { Label::Cat(i) } else { f.get(idx) });
    }
    Ok(LabelImage::from_raw(shape, f.categories(), out))
}

/// Single-category erosion on a plain label image.
///
/// Pixels of `i` whose neighborhood is not all `i` take the value of the
/// nearest non-`i` neighbor (Euclidean distance). When several categories are
/// equally near, `ranking` breaks the tie (earlier wins); with no ranking the
/// pixel is reported as ambiguous.
pub fn nary_erode(
    f: &LabelImage,
    i: u32,
    se: &StructuringElement,
    ranking: Option<&[u32]>,
) -> Result<LabelImage> {
    check_rank(f.shape(), se)?;
    check_plain(f)?;
    check_category(f, i)?;
    let shape = f.shape().to_vec();
    let mut out = Vec::with_capacity(f.pixel_count());
    for idx in 0..f.pixel_count() {
        if f.get(idx) != Label::Cat(i) {
            out.push(f.get(idx));
            continue;
        }
        let coords = grid::coords_of(&shape, idx);
        // nearest non-i neighbors within the element
        let mut best_dist = f64::INFINITY;
        let mut tied: Vec<u32> = Vec::new();
        let mut all_i = true;
        for &o in se.offsets() {
            if let Some(j) = grid::neighbor(&shape, coords, o) {
                let Label::Cat(c) = f.get(j) else { unreachable!() };
                if c == i {
                    continue;
                }
                all_i = false;
                let d = Norm::Euclidean.of(o);
                if d < best_dist - 1e-9 {
                    best_dist = d;
                    tied.clear();
                    tied.push(c);
                } else if (d - best_dist).abs() <= 1e-9 && !tied.contains(&c) {
                    tied.push(c);
                }
            }
        }
        if all_i {
            out.push(Label::Cat(i));
            continue;
        }
        let winner = if tied.len() == 1 {
            tied[0]
        } else {
            match ranking {
                Some(order) => *tied
                    .iter()
                    .filter(|c| order.contains(c))
                    .min_by_key(|c| order.iter().position(|r| r == *c).unwrap())
                    .ok_or(Error::AmbiguousTheta { pixel: idx })?,
                None => return Err(Error::AmbiguousTheta { pixel: idx }),
            }
        };
        out.push(Label::Cat(winner));
    }
    Ok(LabelImage::from_raw(shape, f.categories(), out))
}

fn check_rank(shape: &[usize], se: &StructuringElement) -> Result<()> {
    if se.rank() != shape.len() {
        return Err(Error::InvalidStructuringElement(format!(
            "SE rank {} does not match image rank {}",
            se.rank(),
            shape.len()
        )));
    }
    Ok(())
}

fn check_plain(f: &LabelImage) -> Result<()> {
    if let Some(pixel) = f
        .data()
        .iter()
        .position(|l| matches!(l, Label::Bottom | Label::Top))
    {
        return Err(Error::SentinelLabel { pixel });
    }
    Ok(())
}

fn check_category(f: &LabelImage, i: u32) -> Result<()> {
    if i as usize >= f.categories() {
        return Err(Error::CategoryOutOfRange {
            index: i as usize,
            channels: f.categories(),
        });
    }
    Ok(())
}
