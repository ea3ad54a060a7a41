//! Shared fixtures for the integration suites: seeded generators, a
//! connected-component counter, and independent per-pixel transcriptions of
//! the single-category operations used as oracles. The oracles deliberately
//! share no kernels with the library: they enumerate neighborhoods and
//! radius ladders with their own loops.
#![allow(dead_code)] // each test target uses its own subset

use catmorph::{CategoricalImage, Label, LabelImage, Norm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random simplex image: a mix of smooth pixels, exact one-hot pixels, and a
/// couple of rectangular one-hot plateaus of `plateau_channel`. Pixels never
/// fall in the numerically awkward band just below saturation.
pub fn random_simplex_image(
    rng: &mut ChaCha8Rng,
    shape: &[usize],
    channels: usize,
    plateau_channel: usize,
) -> CategoricalImage {
    let n: usize = shape.iter().product();
    let mut data = Vec::with_capacity(n * channels);
    for _ in 0..n {
        if rng.gen_bool(0.2) {
            let k = rng.gen_range(0..channels);
            data.extend((0..channels).map(|c| if c == k { 1.0 } else { 0.0 }));
        } else {
            let raw: Vec<f64> = (0..channels)
                .map(|_| -(rng.gen_range(1e-6..1.0f64)).ln())
                .collect();
            let sum: f64 = raw.iter().sum();
            let mut pixel: Vec<f64> = raw.iter().map(|v| v / sum).collect();
            // snap almost-saturated pixels to exact vertices
            if let Some(k) = pixel.iter().position(|&p| p > 0.999) {
                pixel.iter_mut().for_each(|p| *p = 0.0);
                pixel[k] = 1.0;
            }
            data.extend(pixel);
        }
    }
    let mut img = CategoricalImage::new(shape.to_vec(), channels, data).unwrap();
    if shape.len() == 2 {
        for _ in 0..2 {
            paint_plateau(rng, &mut img, plateau_channel);
        }
    }
    img
}

/// Overwrite a random rectangle with exact one-hot pixels of `channel`.
fn paint_plateau(rng: &mut ChaCha8Rng, img: &mut CategoricalImage, channel: usize) {
    let (h, w) = (img.shape()[0], img.shape()[1]);
    let channels = img.channels();
    let ph = rng.gen_range(1..=(h / 2).max(2));
    let pw = rng.gen_range(1..=(w / 2).max(2));
    let y0 = rng.gen_range(0..=h - ph);
    let x0 = rng.gen_range(0..=w - pw);
    let mut data = img.data().to_vec();
    for y in y0..y0 + ph {
        for x in x0..x0 + pw {
            let base = (y * w + x) * channels;
            for k in 0..channels {
                data[base + k] = if k == channel { 1.0 } else { 0.0 };
            }
        }
    }
    *img = CategoricalImage::new(img.shape().to_vec(), channels, data).unwrap();
}

pub fn random_labels(rng: &mut ChaCha8Rng, shape: &[usize], categories: usize) -> LabelImage {
    let n: usize = shape.iter().product();
    let labels = (0..n).map(|_| rng.gen_range(0..categories as u32)).collect();
    LabelImage::from_labels(shape.to_vec(), categories, labels).unwrap()
}

/// Number of 4-connected components of `target` in a rank-2 label image.
pub fn connected_components(labels: &LabelImage, target: u32) -> usize {
    let (h, w) = (labels.shape()[0], labels.shape()[1]);
    let mut seen = vec![false; h * w];
    let mut count = 0;
    for start in 0..h * w {
        if seen[start] || labels.get(start) != Label::Cat(target) {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(idx) = stack.pop() {
            let (y, x) = (idx / w, idx % w);
            let mut push = |ny: usize, nx: usize| {
                let j = ny * w + nx;
                if !seen[j] && labels.get(j) == Label::Cat(target) {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if y > 0 {
                push(y - 1, x);
            }
            if y + 1 < h {
                push(y + 1, x);
            }
            if x > 0 {
                push(y, x - 1);
            }
            if x + 1 < w {
                push(y, x + 1);
            }
        }
    }
    count
}

pub fn max_abs_diff(a: &CategoricalImage, b: &CategoricalImage) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Independent transcriptions of the single-category operations.
pub mod oracle {
    use super::*;

    const SAT: f64 = 1e-9;

    fn offset_norm(norm: Norm, dy: i64, dx: i64) -> f64 {
        match norm {
            Norm::CityBlock => (dy.abs() + dx.abs()) as f64,
            Norm::Chessboard => dy.abs().max(dx.abs()) as f64,
            Norm::Euclidean => ((dy * dy + dx * dx) as f64).sqrt(),
        }
    }

    /// In-domain neighbor values of channel-interleaved `data` around pixel
    /// `(y, x)` within the `norm` ball of `radius`, as `(distance, pixel)`.
    fn ball(
        shape: &[usize],
        norm: Norm,
        radius: f64,
        y: usize,
        x: usize,
    ) -> Vec<(f64, usize)> {
        let (h, w) = (shape[0] as i64, shape[1] as i64);
        let reach = radius.floor() as i64;
        let mut out = Vec::new();
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let d = offset_norm(norm, dy, dx);
                if d > radius + 1e-9 {
                    continue;
                }
                let (ny, nx) = (y as i64 + dy, x as i64 + dx);
                if ny < 0 || ny >= h || nx < 0 || nx >= w {
                    continue;
                }
                out.push((d, (ny * w + nx) as usize));
            }
        }
        out
    }

    /// Direct per-pixel dilation of category `i`: grayscale maximum on
    /// channel `i`, remaining channels rescaled to preserve conditionals,
    /// zeroed where the maximum saturates.
    pub fn dilate_i(f: &CategoricalImage, i: usize, radius: f64, norm: Norm) -> Vec<f64> {
        let shape = f.shape();
        let (h, w) = (shape[0], shape[1]);
        let channels = f.channels();
        let mut out = vec![0.0; f.data().len()];
        for y in 0..h {
            for x in 0..w {
                let pixel = y * w + x;
                let src = f.pixel(pixel);
                let dv = ball(shape, norm, radius, y, x)
                    .iter()
                    .map(|&(_, j)| f.pixel(j)[i])
                    .fold(f64::NEG_INFINITY, f64::max);
                let dst = &mut out[pixel * channels..(pixel + 1) * channels];
                dst[i] = dv;
                if dv >= 1.0 - SAT {
                    continue; // other channels stay zero
                }
                let scale = (1.0 - dv) / (1.0 - src[i]);
                for k in 0..channels {
                    if k != i {
                        dst[k] = scale * src[k];
                    }
                }
            }
        }
        out
    }

    /// Direct per-pixel erosion of category `i`, including the saturated
    /// case: mass moves to the per-category maxima over the smallest ball
    /// that contains an unsaturated pixel.
    pub fn erode_i(f: &CategoricalImage, i: usize, radius: f64, norm: Norm) -> Vec<f64> {
        let shape = f.shape();
        let (h, w) = (shape[0], shape[1]);
        let channels = f.channels();
        let mut out = vec![0.0; f.data().len()];
        for y in 0..h {
            for x in 0..w {
                let pixel = y * w + x;
                let src = f.pixel(pixel);
                let neighborhood = ball(shape, norm, radius, y, x);
                let ev = neighborhood
                    .iter()
                    .map(|&(_, j)| f.pixel(j)[i])
                    .fold(f64::INFINITY, f64::min);
                let dst = &mut out[pixel * channels..(pixel + 1) * channels];
                dst[i] = ev;
                if src[i] < 1.0 - SAT {
                    let scale = (1.0 - ev) / (1.0 - src[i]);
                    for k in 0..channels {
                        if k != i {
                            dst[k] = scale * src[k];
                        }
                    }
                } else if ev < 1.0 - SAT {
                    let weights = theta_weights(f, i, norm, pixel, &neighborhood);
                    let wsum: f64 = weights.iter().sum();
                    for k in 0..channels {
                        if k != i {
                            dst[k] = (1.0 - ev) * weights[k] / wsum;
                        }
                    }
                }
            }
        }
        out
    }

    /// Walk the distinct-distance ladder of the neighborhood until channel
    /// `i` drops below saturation; weights are the per-channel maxima over
    /// that prefix.
    fn theta_weights(
        f: &CategoricalImage,
        i: usize,
        _norm: Norm,
        _pixel: usize,
        neighborhood: &[(f64, usize)],
    ) -> Vec<f64> {
        let mut sorted = neighborhood.to_vec();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let mut radii: Vec<f64> = sorted.iter().map(|&(d, _)| d).collect();
        radii.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
        let channels = f.channels();
        let mut weights = vec![0.0f64; channels];
        let mut min_fi = f64::INFINITY;
        let mut cursor = 0;
        for rr in radii {
            while cursor < sorted.len() && sorted[cursor].0 <= rr + 1e-9 {
                let p = f.pixel(sorted[cursor].1);
                min_fi = min_fi.min(p[i]);
                for k in 0..channels {
                    if k != i {
                        weights[k] = weights[k].max(p[k]);
                    }
                }
                cursor += 1;
            }
            if min_fi < 1.0 - SAT {
                return weights;
            }
        }
        panic!("oracle theta: neighborhood saturated despite eroded value < 1");
    }

    /// Per-pixel single-category erosion on crisp labels, reporting
    /// ambiguity instead of erroring: `Ok(label)` or `Err(())` when several
    /// distinct categories are equally near.
    pub fn nary_erode_pixelwise(
        f: &LabelImage,
        i: u32,
        radius: f64,
        norm: Norm,
    ) -> Vec<Result<u32, ()>> {
        let shape = f.shape();
        let (h, w) = (shape[0], shape[1]);
        let mut out = Vec::with_capacity(h * w);
        for y in 0..h {
            for x in 0..w {
                let pixel = y * w + x;
                let Label::Cat(me) = f.get(pixel) else { unreachable!() };
                if me != i {
                    out.push(Ok(me));
                    continue;
                }
                let mut best = f64::INFINITY;
                let mut tied: Vec<u32> = Vec::new();
                for (d, j) in ball(shape, norm, radius, y, x) {
                    let Label::Cat(c) = f.get(j) else { unreachable!() };
                    if c == i {
                        continue;
                    }
                    if d < best - 1e-9 {
                        best = d;
                        tied = vec![c];
                    } else if (d - best).abs() <= 1e-9 && !tied.contains(&c) {
                        tied.push(c);
                    }
                }
                out.push(match tied.len() {
                    0 => Ok(i),
                    1 => Ok(tied[0]),
                    _ => Err(()),
                });
            }
        }
        out
    }
}
