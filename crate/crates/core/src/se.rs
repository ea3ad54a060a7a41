//! Flat structuring elements.
//!
//! A structuring element is a finite set of integer offsets. Balls are
//! materialized once on construction: an offset `y` belongs to the ball of
//! radius `r` iff `‖y‖ ≤ r` (Euclidean inclusion uses `r + 1e-9` so integer
//! radii behave deterministically). Offsets are stored sorted by
//! `(norm, lexicographic)`, which doubles as the radius ladder used when
//! erosion has to search for the nearest unsaturated neighborhood.

use crate::error::{Error, Result};
use crate::grid::MAX_RANK;

/// Inclusion slack for Euclidean balls at integer radii.
pub const EUCLIDEAN_BALL_TOL: f64 = 1e-9;

/// Norm used for ball structuring elements and their radius ladders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    CityBlock,
    Chessboard,
    Euclidean,
}

impl Norm {
    /// Length of an integer offset under this norm.
    pub fn of(&self, offset: [i32; 3]) -> f64 {
        match self {
            Norm::CityBlock => offset.iter().map(|c| c.unsigned_abs() as u64).sum::<u64>() as f64,
            Norm::Chessboard => offset.iter().map(|c| c.unsigned_abs()).max().unwrap() as f64,
            Norm::Euclidean => (offset.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>()).sqrt(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Norm::CityBlock => "city-block",
            Norm::Chessboard => "chessboard",
            Norm::Euclidean => "euclidean",
        }
    }

    pub fn parse(s: &str) -> Option<Norm> {
        match s {
            "city-block" | "cityblock" | "l1" => Some(Norm::CityBlock),
            "chessboard" | "linf" => Some(Norm::Chessboard),
            "euclidean" | "l2" => Some(Norm::Euclidean),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum SeKind {
    Ball { radius: f64, norm: Norm },
    Explicit,
}

/// A flat structuring element on a grid of the given rank.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuringElement {
    rank: usize,
    kind: SeKind,
    offsets: Vec<[i32; 3]>,
    contains_origin: bool,
}

impl StructuringElement {
    /// Ball of the given radius, materialized as an explicit offset list.
    pub fn ball(rank: usize, radius: f64, norm: Norm) -> Result<Self> {
        if !(1..=MAX_RANK).contains(&rank) {
            return Err(Error::InvalidStructuringElement(format!(
                "rank must be 1..=3, got {rank}"
            )));
        }
        if radius.is_nan() || radius <= 0.0 || !radius.is_finite() {
            return Err(Error::InvalidStructuringElement(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        let offsets = ball_offsets(rank, radius, norm);
        Ok(StructuringElement {
            rank,
            kind: SeKind::Ball { radius, norm },
            offsets,
            contains_origin: true,
        })
    }

    /// Explicit offset list. Offsets on axes beyond `rank` must be zero.
    pub fn from_offsets(rank: usize, offsets: Vec<[i32; 3]>) -> Result<Self> {
        if !(1..=MAX_RANK).contains(&rank) {
            return Err(Error::InvalidStructuringElement(format!(
                "rank must be 1..=3, got {rank}"
            )));
        }
        if offsets.is_empty() {
            return Err(Error::InvalidStructuringElement(
                "offset list must be non-empty".to_string(),
            ));
        }
        for o in &offsets {
            if o[rank..].iter().any(|&c| c != 0) {
                return Err(Error::InvalidStructuringElement(format!(
                    "offset {o:?} uses axes beyond rank {rank}"
                )));
            }
        }
        let mut offsets = offsets;
        offsets.sort_by(|a, b| {
            let na = Norm::Euclidean.of(*a);
            let nb = Norm::Euclidean.of(*b);
            na.partial_cmp(&nb).unwrap().then_with(|| a.cmp(b))
        });
        offsets.dedup();
        let contains_origin = offsets.contains(&[0, 0, 0]);
        Ok(StructuringElement {
            rank,
            kind: SeKind::Explicit,
            offsets,
            contains_origin,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn offsets(&self) -> &[[i32; 3]] {
        &self.offsets
    }

    pub fn contains_origin(&self) -> bool {
        self.contains_origin
    }

    pub fn is_ball(&self) -> bool {
        matches!(self.kind, SeKind::Ball { .. })
    }

    /// Radius and norm for ball elements.
    pub fn ball_params(&self) -> Option<(f64, Norm)> {
        match self.kind {
            SeKind::Ball { radius, norm } => Some((radius, norm)),
            SeKind::Explicit => None,
        }
    }

    /// All offsets within the stated norm of the origin, grouped by distinct
    /// norm value in increasing order. For balls this is the radius ladder:
    /// the neighborhood only changes at these values.
    pub fn norm_groups(&self, norm: Norm) -> Vec<(f64, Vec<[i32; 3]>)> {
        let mut tagged: Vec<(f64, [i32; 3])> =
            self.offsets.iter().map(|&o| (norm.of(o), o)).collect();
        tagged.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));
        let mut groups: Vec<(f64, Vec<[i32; 3]>)> = Vec::new();
        for (n, o) in tagged {
            match groups.last_mut() {
                Some((gn, v)) if (n - *gn).abs() <= EUCLIDEAN_BALL_TOL => v.push(o),
                _ => groups.push((n, vec![o])),
            }
        }
        groups
    }
}

/// Integer offsets with `‖y‖ ≤ r` (Euclidean: `r + 1e-9`), sorted by
/// `(norm, lexicographic)`.
fn ball_offsets(rank: usize, radius: f64, norm: Norm) -> Vec<[i32; 3]> {
    let reach = radius.floor() as i32;
    let range = |axis: usize| -> std::ops::RangeInclusive<i32> {
        if axis < rank {
            -reach..=reach
        } else {
            0..=0
        }
    };
    let mut out = Vec::new();
    for dz in range(2) {
        for dy in range(1) {
            for dx in range(0) {
                let o = [dx, dy, dz];
                let n = norm.of(o);
                let included = match norm {
                    Norm::Euclidean => n <= radius + EUCLIDEAN_BALL_TOL,
                    _ => n <= radius,
                };
                if included {
                    out.push(o);
                }
            }
        }
    }
    out.sort_by(|a, b| {
        let na = norm.of(*a);
        let nb = norm.of(*b);
        na.partial_cmp(&nb).unwrap().then_with(|| a.cmp(b))
    });
    out
}
