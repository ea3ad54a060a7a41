//! PNG bridges: importing crisp label masks and rendering images for
//! inspection.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::image::{CategoricalImage, Label, LabelImage};
use crate::io::catd::CatdImage;

/// One RGB color per category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette(Vec<[u8; 3]>);

impl Palette {
    pub fn new(colors: Vec<[u8; 3]>) -> Self {
        Palette(colors)
    }

    /// Parse a comma-separated list of `#rrggbb` entries.
    pub fn parse(s: &str) -> Result<Self> {
        let mut colors = Vec::new();
        for part in s.split(',') {
            let part = part.trim().trim_start_matches('#');
            if part.len() != 6 || !part.chars().all(|c| c.is_ascii_hexdigit()) {
                return Err(Error::Unsupported(format!(
                    "palette entry '{part}' is not an rrggbb color"
                )));
            }
            let v = u32::from_str_radix(part, 16).unwrap();
            colors.push([(v >> 16) as u8, (v >> 8) as u8, v as u8]);
        }
        Ok(Palette(colors))
    }

    /// Well-spaced default colors for quick renders.
    pub fn auto(categories: usize) -> Self {
        const BASE: [[u8; 3]; 8] = [
            [230, 25, 75],
            [60, 180, 75],
            [0, 130, 200],
            [255, 225, 25],
            [145, 30, 180],
            [70, 240, 240],
            [245, 130, 48],
            [128, 128, 128],
        ];
        let colors = (0..categories)
            .map(|k| {
                let b = BASE[k % BASE.len()];
                let shade = (k / BASE.len()) as u16;
                [
                    (b[0] as u16 * 3 / (3 + shade)) as u8,
                    (b[1] as u16 * 3 / (3 + shade)) as u8,
                    (b[2] as u16 * 3 / (3 + shade)) as u8,
                ]
            })
            .collect();
        Palette(colors)
    }

    pub fn colors(&self) -> &[[u8; 3]] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Read a PNG of crisp category colors as a one-hot categorical image.
/// Every pixel color must appear in the palette; the palette index becomes
/// the category.
pub fn import_png_labels(path: impl AsRef<Path>, palette: &Palette) -> Result<CategoricalImage> {
    let img = image::open(path)
        .map_err(|e| Error::Unsupported(format!("cannot read PNG: {e}")))?
        .to_rgb8();
    import_rgb_labels(&img, palette)
}

fn import_rgb_labels(img: &RgbImage, palette: &Palette) -> Result<CategoricalImage> {
    if palette.len() < 2 {
        return Err(Error::PaletteSize {
            palette: palette.len(),
            channels: 2,
        });
    }
    let (w, h) = img.dimensions();
    let mut labels = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let Rgb(c) = *img.get_pixel(x, y);
            match palette.colors().iter().position(|&p| p == c) {
                Some(k) => labels.push(k as u32),
                None => {
                    return Err(Error::UnmappedColor {
                        color: c,
                        x: x as usize,
                        y: y as usize,
                    })
                }
            }
        }
    }
    let labels = LabelImage::from_labels(vec![h as usize, w as usize], palette.len(), labels)?;
    CategoricalImage::one_hot(&labels, palette.len())
}

/// Rendering styles for [`render`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderStyle {
    /// Per-pixel convex combination of the palette colors, weighted by the
    /// categorical probabilities.
    RgbMixture,
    /// Shannon entropy, black (certain) to white (uniform).
    Entropy,
    /// Euclidean norm of the Dirichlet parameter vector, scaled to the
    /// image maximum.
    Magnitude,
    /// Palette color of the most probable category.
    Argmax,
}

impl RenderStyle {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rgb" | "rgb-mixture" | "mixture" => Some(RenderStyle::RgbMixture),
            "entropy" => Some(RenderStyle::Entropy),
            "magnitude" => Some(RenderStyle::Magnitude),
            "argmax" => Some(RenderStyle::Argmax),
            _ => None,
        }
    }
}

/// Deterministic 8-bit quantization, rounding half away from zero.
fn quantize(v: f64) -> u8 {
    v.clamp(0.0, 255.0).round() as u8
}

/// Render to an 8-bit RGB image. Dirichlet inputs are projected to their
/// expected categorical distribution first, except for
/// [`RenderStyle::Magnitude`] which reads the parameters directly (and only
/// accepts Dirichlet inputs). Inputs of rank 1 render as a one-pixel-tall
/// strip; rank 3 is not renderable.
pub fn render(img: &CatdImage, style: RenderStyle, palette: Option<&Palette>) -> Result<RgbImage> {
    let shape = img.shape().to_vec();
    let (h, w) = match shape.len() {
        1 => (1usize, shape[0]),
        2 => (shape[0], shape[1]),
        _ => {
            return Err(Error::Unsupported(
                "only rank-1 and rank-2 images can be rendered".to_string(),
            ))
        }
    };

    if style == RenderStyle::Magnitude {
        let d = img.as_dirichlet()?;
        let m = d.magnitude_map();
        let peak = m.data().iter().cloned().fold(0.0f64, f64::max);
        return Ok(gray(w, h, m.data(), |v| {
            if peak > 0.0 {
                255.0 * v / peak
            } else {
                0.0
            }
        }));
    }

    let owned;
    let cat: &CategoricalImage = match img {
        CatdImage::Categorical(c) => c,
        CatdImage::Dirichlet(d) => {
            owned = d.expectation();
            &owned
        }
        CatdImage::Scalar(_) => {
            return Err(Error::PayloadKind {
                expected: "categorical or dirichlet".to_string(),
                found: "scalar".to_string(),
            })
        }
    };

    match style {
        RenderStyle::Entropy => {
            let hmap = cat.entropy_map();
            let hmax = (cat.channels() as f64).ln();
            Ok(gray(w, h, hmap.data(), |v| 255.0 * v / hmax))
        }
        RenderStyle::RgbMixture | RenderStyle::Argmax => {
            let palette = palette.ok_or_else(|| {
                Error::Unsupported("this style requires a palette".to_string())
            })?;
            if palette.len() != cat.channels() {
                return Err(Error::PaletteSize {
                    palette: palette.len(),
                    channels: cat.channels(),
                });
            }
            let mut out = RgbImage::new(w as u32, h as u32);
            for (pixel, p) in out.pixels_mut().enumerate() {
                let probs = cat.pixel(pixel);
                let rgb = match style {
                    RenderStyle::RgbMixture => {
                        let mut acc = [0.0f64; 3];
                        for (k, &pk) in probs.iter().enumerate() {
                            for (a, &c) in acc.iter_mut().zip(&palette.colors()[k]) {
                                *a += pk * c as f64;
                            }
                        }
                        [quantize(acc[0]), quantize(acc[1]), quantize(acc[2])]
                    }
                    _ => {
                        let mut best = 0usize;
                        for (k, &v) in probs.iter().enumerate().skip(1) {
                            if v > probs[best] {
                                best = k;
                            }
                        }
                        palette.colors()[best]
                    }
                };
                *p = Rgb(rgb);
            }
            Ok(out)
        }
        RenderStyle::Magnitude => unreachable!(),
    }
}

fn gray(w: usize, h: usize, values: &[f64], scale: impl Fn(f64) -> f64) -> RgbImage {
    let mut out = RgbImage::new(w as u32, h as u32);
    for (pixel, p) in out.pixels_mut().enumerate() {
        let v = quantize(scale(values[pixel]));
        *p = Rgb([v, v, v]);
    }
    out
}

/// Map crisp labels to palette colors; sentinels are not renderable.
pub fn label_render(labels: &LabelImage, palette: &Palette) -> Result<RgbImage> {
    if palette.len() != labels.categories() {
        return Err(Error::PaletteSize {
            palette: palette.len(),
            channels: labels.categories(),
        });
    }
    let shape = labels.shape();
    let (h, w) = match shape.len() {
        1 => (1usize, shape[0]),
        2 => (shape[0], shape[1]),
        _ => {
            return Err(Error::Unsupported(
                "only rank-1 and rank-2 images can be rendered".to_string(),
            ))
        }
    };
    let mut out = RgbImage::new(w as u32, h as u32);
    for (pixel, p) in out.pixels_mut().enumerate() {
        match labels.get(pixel) {
            Label::Cat(k) => *p = Rgb(palette.colors()[k as usize]),
            _ => return Err(Error::SentinelLabel { pixel }),
        }
    }
    Ok(out)
}
