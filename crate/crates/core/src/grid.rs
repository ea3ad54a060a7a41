//! Row-major index arithmetic for 1-, 2- and 3-dimensional grids.
//!
//! Coordinates and offsets are fixed-width `[_; 3]` arrays; trailing axes of
//! lower-rank grids are pinned to zero. The last axis varies fastest.

pub(crate) const MAX_RANK: usize = 3;

pub(crate) fn pixel_count(shape: &[usize]) -> usize {
    shape.iter().product()
}

pub(crate) fn check_shape(shape: &[usize]) -> Result<(), String> {
    if shape.is_empty() || shape.len() > MAX_RANK {
        return Err(format!("rank must be 1..=3, got {}", shape.len()));
    }
    if shape.contains(&0) {
        return Err("extents must be >= 1".to_string());
    }
    Ok(())
}

/// Decompose a linear index into padded coordinates.
pub(crate) fn coords_of(shape: &[usize], mut idx: usize) -> [usize; 3] {
    let mut c = [0usize; 3];
    for axis in (0..shape.len()).rev() {
        c[axis] = idx % shape[axis];
        idx /= shape[axis];
    }
    c
}

pub(crate) fn index_of(shape: &[usize], coords: [usize; 3]) -> usize {
    let mut idx = 0;
    for axis in 0..shape.len() {
        idx = idx * shape[axis] + coords[axis];
    }
    idx
}

/// Linear index of `coords + offset`, or `None` when it leaves the grid.
pub(crate) fn neighbor(shape: &[usize], coords: [usize; 3], offset: [i32; 3]) -> Option<usize> {
    let mut c = [0usize; 3];
    for axis in 0..shape.len() {
        let v = coords[axis] as i64 + offset[axis] as i64;
        if v < 0 || v >= shape[axis] as i64 {
            return None;
        }
        c[axis] = v as usize;
    }
    // offsets on unused axes must be zero for lower-rank grids
    if offset[shape.len()..MAX_RANK].iter().any(|&c| c != 0) {
        return None;
    }
    Some(index_of(shape, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_2d() {
        let shape = [3usize, 4];
        for idx in 0..pixel_count(&shape) {
            assert_eq!(index_of(&shape, coords_of(&shape, idx)), idx);
        }
    }

    #[test]
    fn neighbor_clips() {
        let shape = [2usize, 2];
        assert_eq!(neighbor(&shape, [0, 0, 0], [-1, 0, 0]), None);
        assert_eq!(neighbor(&shape, [0, 0, 0], [1, 1, 0]), Some(3));
        assert_eq!(neighbor(&shape, [1, 1, 0], [0, 1, 0]), None);
    }

    #[test]
    fn lower_rank_offsets_rejected() {
        let shape = [4usize];
        assert_eq!(neighbor(&shape, [1, 0, 0], [0, 1, 0]), None);
        assert_eq!(neighbor(&shape, [1, 0, 0], [1, 0, 0]), Some(2));
    }
}
