//! Protected morphology on categorical distributions.
//!
//! A set `L` of protected categories is frozen: those channels are copied
//! bit-for-bit. Protection also shapes connectivity — mass can only
//! propagate along paths whose pixels leave room for it — so neighborhoods
//! are geodesic balls on masked domains rather than fixed offset sets. Ball
//! structuring elements are required; their norm picks the graph metric (see
//! [`crate::geodesic`]).
//!
//! Two readings of "room for it" are provided:
//!
//! * [`ProtectionMode::Literal`] (default): a single maximal domain
//!   `Ω⁰ = { f_L < 1 − wall_tol }`. Only fully protected pixels block
//!   propagation; fractional protection still caps the operated channel at
//!   `1 − f_L` pointwise. This is the limit of the nested-domain family as
//!   the carried mass tends to zero (the family is monotone, so its upper
//!   envelope is attained there — `sup_collapses_to_maximal_domain` below
//!   checks this).
//! * [`ProtectionMode::Capacity`]: mass `p` may only traverse pixels with
//!   `f_L ≤ 1 − p`, evaluated over a ladder of `p`-levels: the exact set of
//!   values the data can realize when that set is small, otherwise
//!   `plevels` uniform levels. The two modes agree wherever protection is
//!   crisp (`f_L ∈ {0, 1}`).
//!
//! With `L = ∅` both modes reduce to the unprotected operations of
//! [`crate::categorical`] (exactly for city-block and chessboard balls,
//! whose graph metrics are exact).

use crate::categorical::rebalance;
use crate::error::{Error, Result};
use crate::geodesic::{ball_query_with_distances, DomainMask, GeodesicBackend};
use crate::image::CategoricalImage;
use crate::se::StructuringElement;

/// How a protected operation interprets fractional protected mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProtectionMode {
    #[default]
    Literal,
    Capacity,
}

/// Which categories are protected and how the domains are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtectionSpec {
    protected: Vec<usize>,
    mode: ProtectionMode,
    plevels: usize,
    wall_tol: f64,
    backend: GeodesicBackend,
}

impl ProtectionSpec {
    pub fn new(protected: &[usize]) -> Self {
        let mut protected = protected.to_vec();
        protected.sort_unstable();
        protected.dedup();
        ProtectionSpec {
            protected,
            mode: ProtectionMode::Literal,
            plevels: 64,
            wall_tol: 1e-9,
            backend: GeodesicBackend::Auto,
        }
    }

    pub fn mode(mut self, mode: ProtectionMode) -> Self {
        self.mode = mode;
        self
    }

    /// Number of uniform capacity levels when the data realizes too many
    /// distinct values (default 64).
    pub fn plevels(mut self, plevels: usize) -> Self {
        self.plevels = plevels.max(1);
        self
    }

    /// Threshold below which residual room counts as "fully protected"
    /// (default 1e-9).
    pub fn wall_tol(mut self, tol: f64) -> Self {
        self.wall_tol = tol;
        self
    }

    pub fn backend(mut self, backend: GeodesicBackend) -> Self {
        self.backend = backend;
        self
    }

    pub fn protected(&self) -> &[usize] {
        &self.protected
    }

    pub fn protection_mode(&self) -> ProtectionMode {
        self.mode
    }
}

pub fn protected_dilate(
    f: &CategoricalImage,
    i: usize,
    se: &StructuringElement,
    spec: &ProtectionSpec,
) -> Result<CategoricalImage> {
    Ok(protected_dilate_logged(f, i, se, spec)?.0)
}

pub fn protected_dilate_logged(
    f: &CategoricalImage,
    i: usize,
    se: &StructuringElement,
    spec: &ProtectionSpec,
) -> Result<(CategoricalImage, f64)> {
    let ctx = Context::prepare(f, i, se, spec)?;
    let mut out = f.clone();
    let mut skip = vec![false; f.pixel_count()];
    #[allow(clippy::needless_range_loop)]
    for pixel in 0..f.pixel_count() {
        let fi = f.pixel(pixel)[i];
        let cap = (1.0 - ctx.f_l[pixel]).max(0.0);
        let mut best: Option<f64> = None;
        for (level, domain) in ctx.domains() {
            let ball = ctx.ball(pixel, domain);
            if ball.is_empty() {
                continue;
            }
            let gmax = ball
                .iter()
                .map(|&(idx, _)| f.pixel(idx)[i])
                .fold(f64::NEG_INFINITY, f64::max);
            let v = match level {
                Some(p) => gmax.min(p),
                None => gmax,
            };
            best = Some(best.map_or(v, |b| b.max(v)));
        }
        match best {
            None => skip[pixel] = true, // outside every domain: unchanged
            Some(v) => {
                // never below the pixel's own value (level quantization
                // could otherwise shrink it), never above the room left
                let vi = v.min(cap).max(fi.min(cap));
                let residual = (1.0 - ctx.f_l[pixel] - vi).max(0.0);
                let scale = if ctx.f_j[pixel] > spec.wall_tol {
                    residual / ctx.f_j[pixel]
                } else {
                    0.0 // no unprotected mass: residual is zero too
                };
                let src = f.pixel(pixel).to_vec();
                let dst = out.pixel_mut(pixel);
                dst[i] = vi;
                for &k in &ctx.j_channels {
                    dst[k] = scale * src[k];
                }
            }
        }
    }
    let drift = rebalance(&mut out, i, Some(&ctx.l_mask), Some(&skip));
    Ok((out, drift))
}

pub fn protected_erode(
    f: &CategoricalImage,
    i: usize,
    se: &StructuringElement,
    spec: &ProtectionSpec,
) -> Result<CategoricalImage> {
    Ok(protected_erode_logged(f, i, se, spec)?.0)
}

pub fn protected_erode_logged(
    f: &CategoricalImage,
    i: usize,
    se: &StructuringElement,
    spec: &ProtectionSpec,
) -> Result<(CategoricalImage, f64)> {
    let ctx = Context::prepare(f, i, se, spec)?;
    let mut out = f.clone();
    let mut skip = vec![false; f.pixel_count()];
    #[allow(clippy::needless_range_loop)]
    for pixel in 0..f.pixel_count() {
        let balls: Vec<Vec<(usize, f64)>> = ctx
            .domains()
            .map(|(_, domain)| ctx.ball(pixel, domain))
            .collect();
        // a pixel only changes when some reachable pixel offers
        // replacement mass
        let reachable_j = balls
            .iter()
            .flatten()
            .map(|&(idx, _)| ctx.f_j[idx])
            .fold(0.0f64, f64::max);
        if reachable_j <= spec.wall_tol {
            skip[pixel] = true;
            continue;
        }
        let ball_min = balls
            .iter()
            .filter(|b| !b.is_empty())
            .map(|b| {
                b.iter()
                    .map(|&(idx, _)| f.pixel(idx)[i])
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min);
        debug_assert!(ball_min.is_finite(), "reachable mass implies a non-empty ball");
        let ev = ball_min;
        let residual = (1.0 - ctx.f_l[pixel] - ev).max(0.0);
        if ctx.f_j[pixel] > spec.wall_tol {
            // rescale the unprotected channels to the freed room
            let scale = residual / ctx.f_j[pixel];
            let src = f.pixel(pixel).to_vec();
            let dst = out.pixel_mut(pixel);
            dst[i] = ev;
            for &k in &ctx.j_channels {
                dst[k] = scale * src[k];
            }
            continue;
        }
        if residual <= spec.wall_tol {
            let dst = out.pixel_mut(pixel);
            dst[i] = ev;
            for &k in &ctx.j_channels {
                dst[k] = 0.0;
            }
            continue;
        }
        // no local mass to rescale: split by the nearest reachable
        // categories
        let weights = ctx
            .ladder_weights(pixel, &balls)
            .ok_or(Error::ThetaContract { pixel })?;
        let wsum: f64 = ctx.j_channels.iter().map(|&k| weights[k]).sum();
        let dst = out.pixel_mut(pixel);
        dst[i] = ev;
        for &k in &ctx.j_channels {
            dst[k] = residual * weights[k] / wsum;
        }
    }
    let drift = rebalance(&mut out, i, Some(&ctx.l_mask), Some(&skip));
    Ok((out, drift))
}

/// Mass-splitting weights for protected erosion at a pixel with no
/// unprotected mass of its own: per unprotected category, the largest value
/// reachable within the smallest geodesic radius at which replacement mass
/// exists.
///
/// Errors when the pixel is unreachable from any replacement mass (the
/// operation would leave it unchanged) or when it still carries unprotected
/// mass (no splitting happens there).
pub fn protected_theta(
    f: &CategoricalImage,
    i: usize,
    coords: &[usize],
    se: &StructuringElement,
    spec: &ProtectionSpec,
) -> Result<Vec<f64>> {
    let ctx = Context::prepare(f, i, se, spec)?;
    let pixel = crate::image::linear_index(f.shape(), coords).ok_or_else(|| {
        Error::InvalidShape {
            shape: coords.to_vec(),
            reason: "pixel coordinates out of range".to_string(),
        }
    })?;
    let balls: Vec<Vec<(usize, f64)>> = ctx
        .domains()
        .map(|(_, domain)| ctx.ball(pixel, domain))
        .collect();
    let reachable_j = balls
        .iter()
        .flatten()
        .map(|&(idx, _)| ctx.f_j[idx])
        .fold(0.0f64, f64::max);
    if reachable_j <= spec.wall_tol || ctx.f_j[pixel] > spec.wall_tol {
        return Err(Error::ThetaContract { pixel });
    }
    ctx.ladder_weights(pixel, &balls)
        .ok_or(Error::ThetaContract { pixel })
}

pub fn protected_open(
    f: &CategoricalImage,
    i: usize,
    se: &StructuringElement,
    spec: &ProtectionSpec,
) -> Result<CategoricalImage> {
    Ok(protected_open_logged(f, i, se, spec)?.0)
}

pub fn protected_open_logged(
    f: &CategoricalImage,
    i: usize,
    se: &StructuringElement,
    spec: &ProtectionSpec,
) -> Result<(CategoricalImage, f64)> {
    protected_open_split(f, i, se, spec, spec)
}

/// Opening with independent specs for the erosion and dilation halves.
pub fn protected_open_split(
    f: &CategoricalImage,
    i: usize,
    se: &StructuringElement,
    erode_spec: &ProtectionSpec,
    dilate_spec: &ProtectionSpec,
) -> Result<(CategoricalImage, f64)> {
    let (e, d1) = protected_erode_logged(f, i, se, erode_spec)?;
    let (o, d2) = protected_dilate_logged(&e, i, se, dilate_spec)?;
    Ok((o, d1.max(d2)))
}

pub fn protected_close(
    f: &CategoricalImage,
    i: usize,
    se: &StructuringElement,
    spec: &ProtectionSpec,
) -> Result<CategoricalImage> {
    Ok(protected_close_logged(f, i, se, spec)?.0)
}

pub fn protected_close_logged(
    f: &CategoricalImage,
    i: usize,
    se: &StructuringElement,
    spec: &ProtectionSpec,
) -> Result<(CategoricalImage, f64)> {
    protected_close_split(f, i, se, spec, spec)
}

/// Closing with independent specs for the dilation and erosion halves.
pub fn protected_close_split(
    f: &CategoricalImage,
    i: usize,
    se: &StructuringElement,
    dilate_spec: &ProtectionSpec,
    erode_spec: &ProtectionSpec,
) -> Result<(CategoricalImage, f64)> {
    let (d, d1) = protected_dilate_logged(f, i, se, dilate_spec)?;
    let (c, d2) = protected_erode_logged(&d, i, se, erode_spec)?;
    Ok((c, d1.max(d2)))
}

/// Precomputed per-call state: protected/unprotected mass fields and the
/// domain masks mass may travel through.
struct Context<'a> {
    f: &'a CategoricalImage,
    i: usize,
    spec: &'a ProtectionSpec,
    radius: f64,
    norm: crate::se::Norm,
    f_l: Vec<f64>,
    f_j: Vec<f64>,
    l_mask: Vec<bool>,
    j_channels: Vec<usize>,
    /// `(capacity level, domain)`; literal mode has one entry with no level.
    domain_set: Vec<(Option<f64>, DomainMask)>,
}

impl<'a> Context<'a> {
    fn prepare(
        f: &'a CategoricalImage,
        i: usize,
        se: &StructuringElement,
        spec: &'a ProtectionSpec,
    ) -> Result<Self> {
        let channels = f.channels();
        if i >= channels {
            return Err(Error::CategoryOutOfRange {
                index: i,
                channels,
            });
        }
        for &k in &spec.protected {
            if k >= channels {
                return Err(Error::CategoryOutOfRange {
                    index: k,
                    channels,
                });
            }
        }
        if spec.protected.contains(&i) {
            return Err(Error::ProtectedCategory { category: i });
        }
        let Some((radius, norm)) = se.ball_params() else {
            return Err(Error::InvalidStructuringElement(
                "protected operations require a ball structuring element".to_string(),
            ));
        };
        if se.rank() != f.shape().len() {
            return Err(Error::InvalidStructuringElement(format!(
                "SE rank {} does not match image rank {}",
                se.rank(),
                f.shape().len()
            )));
        }

        let mut l_mask = vec![false; channels];
        for &k in &spec.protected {
            l_mask[k] = true;
        }
        let j_channels: Vec<usize> = (0..channels).filter(|&k| k != i && !l_mask[k]).collect();
        let n = f.pixel_count();
        let mut f_l = vec![0.0; n];
        let mut f_j = vec![0.0; n];
        for pixel in 0..n {
            let p = f.pixel(pixel);
            f_l[pixel] = spec.protected.iter().map(|&k| p[k]).sum();
            f_j[pixel] = j_channels.iter().map(|&k| p[k]).sum();
        }

        let domain_set = match spec.mode {
            ProtectionMode::Literal => {
                let data = f_l.iter().map(|&v| v < 1.0 - spec.wall_tol).collect();
                vec![(None, DomainMask::new(f.shape().to_vec(), data)?)]
            }
            ProtectionMode::Capacity => {
                let levels = capacity_levels(f, i, &f_l, spec.plevels);
                levels
                    .into_iter()
                    .map(|p| {
                        let data = f_l.iter().map(|&v| v <= 1.0 - p + spec.wall_tol).collect();
                        Ok((Some(p), DomainMask::new(f.shape().to_vec(), data)?))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };

        Ok(Context {
            f,
            i,
            spec,
            radius,
            norm,
            f_l,
            f_j,
            l_mask,
            j_channels,
            domain_set,
        })
    }

    fn domains(&self) -> impl Iterator<Item = (Option<f64>, &DomainMask)> {
        self.domain_set.iter().map(|(p, d)| (*p, d))
    }

    fn ball(&self, pixel: usize, domain: &DomainMask) -> Vec<(usize, f64)> {
        ball_query_with_distances(pixel, self.radius, domain, self.norm, self.spec.backend)
    }

    /// Walk the merged distance ladder of the per-domain balls outward until
    /// the neighborhood both frees room below `1 - f_L(x)` and reaches
    /// positive unprotected mass; the weights are the per-channel maxima
    /// over that neighborhood.
    fn ladder_weights(&self, pixel: usize, balls: &[Vec<(usize, f64)>]) -> Option<Vec<f64>> {
        let mut radii: Vec<f64> = balls.iter().flatten().map(|&(_, d)| d).collect();
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        radii.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);

        let channels = self.f.channels();
        let room = 1.0 - self.f_l[pixel];
        let mut cursors = vec![0usize; balls.len()];
        let mut min_fi = f64::INFINITY;
        let mut weights = vec![0.0f64; channels];
        for rr in radii {
            for (ball, cursor) in balls.iter().zip(cursors.iter_mut()) {
                while *cursor < ball.len() && ball[*cursor].1 <= rr + 1e-9 {
                    let idx = ball[*cursor].0;
                    let p = self.f.pixel(idx);
                    min_fi = min_fi.min(p[self.i]);
                    for &k in &self.j_channels {
                        weights[k] = weights[k].max(p[k]);
                    }
                    *cursor += 1;
                }
            }
            let residual = room - min_fi;
            let wsum: f64 = self.j_channels.iter().map(|&k| weights[k]).sum();
            if residual > self.spec.wall_tol && wsum > 0.0 {
                return Some(weights);
            }
        }
        None
    }
}

/// Capacity levels: the exact values the pair `(f_i, 1 − f_L)` realizes when
/// that set is small enough, otherwise uniform quantization of `(0, 1]`.
fn capacity_levels(f: &CategoricalImage, i: usize, f_l: &[f64], plevels: usize) -> Vec<f64> {
    let mut cands: Vec<f64> = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for pixel in 0..f.pixel_count() {
        let v = f.pixel(pixel)[i].min(1.0);
        if v > 0.0 {
            cands.push(v);
        }
        let w = (1.0 - f_l[pixel]).min(1.0);
        if w > 0.0 {
            cands.push(w);
        }
    }
    cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cands.dedup();
    if !cands.is_empty() && cands.len() <= plevels {
        cands
    } else {
        (1..=plevels).map(|j| j as f64 / plevels as f64).collect()
    }
}
