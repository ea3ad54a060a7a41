//! The `.catd` container: a minimal little-endian tensor file.
//!
//! Layout, all multi-byte fields little-endian:
//!
//! ```text
//! offset 0   magic      4 ASCII bytes "CATD"
//!        4   version    u32, currently 1
//!        8   kind       u32: 0 categorical, 1 dirichlet, 2 scalar
//!       12   rank       u32 (1..=3)
//!       16   shape      rank × u32
//!        …   channels   u32 (1 for scalar payloads)
//!        …   payload    product(shape) · channels IEEE-754 binary32 values,
//!                       row-major, channels innermost
//! ```
//!
//! Reading validates the payload against the type invariants (simplex for
//! categorical, positivity for Dirichlet), so a successfully read image is
//! usable as-is. Writing narrows to `f32`; files written from images that
//! round-trip through `f32` losslessly (including anything read from a
//! `.catd` file) are reproduced bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{CategoricalImage, DirichletImage, ScalarImage, SIMPLEX_TOL};

pub const MAGIC: [u8; 4] = *b"CATD";
pub const VERSION: u32 = 1;

/// Payload type stored in the header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadKind {
    Categorical = 0,
    Dirichlet = 1,
    Scalar = 2,
}

impl PayloadKind {
    pub fn name(&self) -> &'static str {
        match self {
            PayloadKind::Categorical => "categorical",
            PayloadKind::Dirichlet => "dirichlet",
            PayloadKind::Scalar => "scalar",
        }
    }
}

/// Any image a `.catd` file can hold.
#[derive(Debug, Clone, PartialEq)]
pub enum CatdImage {
    Categorical(CategoricalImage),
    Dirichlet(DirichletImage),
    Scalar(ScalarImage),
}

impl CatdImage {
    pub fn kind(&self) -> PayloadKind {
        match self {
            CatdImage::Categorical(_) => PayloadKind::Categorical,
            CatdImage::Dirichlet(_) => PayloadKind::Dirichlet,
            CatdImage::Scalar(_) => PayloadKind::Scalar,
        }
    }

    pub fn shape(&self) -> &[usize] {
        match self {
            CatdImage::Categorical(img) => img.shape(),
            CatdImage::Dirichlet(img) => img.shape(),
            CatdImage::Scalar(img) => img.shape(),
        }
    }

    pub fn channels(&self) -> usize {
        match self {
            CatdImage::Categorical(img) => img.channels(),
            CatdImage::Dirichlet(img) => img.channels(),
            CatdImage::Scalar(_) => 1,
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            CatdImage::Categorical(img) => img.data(),
            CatdImage::Dirichlet(img) => img.data(),
            CatdImage::Scalar(img) => img.data(),
        }
    }

    pub fn as_categorical(&self) -> Result<&CategoricalImage> {
        match self {
            CatdImage::Categorical(img) => Ok(img),
            other => Err(Error::PayloadKind {
                expected: "categorical".to_string(),
                found: other.kind().name().to_string(),
            }),
        }
    }

    pub fn as_dirichlet(&self) -> Result<&DirichletImage> {
        match self {
            CatdImage::Dirichlet(img) => Ok(img),
            other => Err(Error::PayloadKind {
                expected: "dirichlet".to_string(),
                found: other.kind().name().to_string(),
            }),
        }
    }
}

pub fn write_catd(img: &CatdImage, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_catd_to(img, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_catd_to(img: &CatdImage, w: &mut impl Write) -> Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(img.kind() as u32).to_le_bytes())?;
    let shape = img.shape();
    w.write_all(&(shape.len() as u32).to_le_bytes())?;
    for &e in shape {
        w.write_all(&(e as u32).to_le_bytes())?;
    }
    w.write_all(&(img.channels() as u32).to_le_bytes())?;
    for &v in img.values() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_catd(path: impl AsRef<Path>) -> Result<CatdImage> {
    let mut r = BufReader::new(File::open(path)?);
    read_catd_from(&mut r)
}

pub fn read_catd_from(r: &mut impl Read) -> Result<CatdImage> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let kind = match read_u32(r)? {
        0 => PayloadKind::Categorical,
        1 => PayloadKind::Dirichlet,
        2 => PayloadKind::Scalar,
        other => return Err(Error::UnknownPayloadKind(other)),
    };
    let rank = read_u32(r)? as usize;
    if !(1..=3).contains(&rank) {
        return Err(Error::InvalidShape {
            shape: vec![rank],
            reason: "rank must be 1..=3".to_string(),
        });
    }
    let mut shape = Vec::with_capacity(rank);
    for _ in 0..rank {
        shape.push(read_u32(r)? as usize);
    }
    let channels = read_u32(r)? as usize;

    let pixels: usize = shape.iter().product();
    let expected = pixels
        .checked_mul(channels)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::InvalidShape {
            shape: shape.clone(),
            reason: "payload size overflows".to_string(),
        })?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != expected {
        return Err(Error::TruncatedPayload {
            expected,
            actual: payload.len(),
        });
    }
    let data: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();

    match kind {
        PayloadKind::Categorical => {
            let img = CategoricalImage::from_raw(shape, channels, data)?;
            img.validate(SIMPLEX_TOL)?;
            Ok(CatdImage::Categorical(img))
        }
        PayloadKind::Dirichlet => Ok(CatdImage::Dirichlet(DirichletImage::new(
            shape, channels, data,
        )?)),
        PayloadKind::Scalar => {
            if channels != 1 {
                return Err(Error::InvalidChannels {
                    channels,
                    reason: "scalar payloads carry exactly one channel".to_string(),
                });
            }
            Ok(CatdImage::Scalar(ScalarImage::new(shape, data)?))
        }
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}
