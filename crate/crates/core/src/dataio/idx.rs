use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use flate2::read::GzDecoder;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const IMAGE_SIDE: usize = 28;

/// 28×28 grayscale images as raw bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSet {
    pub rows: usize,
    pub cols: usize,
    pub images: Vec<Vec<u8>>,
    pub labels: Option<Vec<u8>>,
}

impl ImageSet {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> ImageSet {
        ImageSet {
            rows: self.rows,
            cols: self.cols,
            images: indices.iter().map(|&i| self.images[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }
}

fn read_all(path: &Path, gzipped: bool) -> Result<Vec<u8>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut buf = Vec::new();
    let res = if gzipped {
        GzDecoder::new(BufReader::new(file)).read_to_end(&mut buf)
    } else {
        BufReader::new(file).read_to_end(&mut buf)
    };
    res.map_err(|e| Error::io(path, e))?;
    Ok(buf)
}

pub fn is_gzip_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(Error::Truncated {
            expected: at + 4,
            actual: bytes.len(),
        })
}

/// Parses an idx3-ubyte image tensor held in memory.
pub fn parse_idx_images(bytes: &[u8]) -> Result<ImageSet> {
    let magic = be_u32(bytes, 0)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::BadMagic {
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    if rows != IMAGE_SIDE {
        return Err(Error::DimensionMismatch {
            what: "idx rows",
            expected: IMAGE_SIDE,
            actual: rows,
        });
    }
    if cols != IMAGE_SIDE {
        return Err(Error::DimensionMismatch {
            what: "idx cols",
            expected: IMAGE_SIDE,
            actual: cols,
        });
    }
    let pixels = rows * cols;
    let payload = &bytes[16..];
    let expected = count * pixels;
    if payload.len() != expected {
        return Err(Error::Truncated {
            expected,
            actual: payload.len(),
        });
    }
    Ok(ImageSet {
        rows,
        cols,
        images: payload.chunks_exact(pixels).map(<[u8]>::to_vec).collect(),
        labels: None,
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0)?;
    if magic != LABEL_MAGIC {
        return Err(Error::BadMagic {
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(bytes, 4)? as usize;
    let payload = &bytes[8..];
    if payload.len() != count {
        return Err(Error::Truncated {
            expected: count,
            actual: payload.len(),
        });
    }
    Ok(payload.to_vec())
}

pub fn load_idx_images(path: &Path, gzipped: bool) -> Result<ImageSet> {
    parse_idx_images(&read_all(path, gzipped)?)
}

pub fn load_idx_labels(path: &Path, gzipped: bool) -> Result<Vec<u8>> {
    parse_idx_labels(&read_all(path, gzipped)?)
}

/// Loads images and, when a sibling `*-labels-idx1-ubyte[.gz]` file exists,
/// its labels. Gzip is inferred from the extension.
pub fn load_image_set(path: &Path) -> Result<ImageSet> {
    let gz = is_gzip_path(path);
    let mut set = load_idx_images(path, gz)?;
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default();
    if name.contains("images-idx3") {
        let label_path = path.with_file_name(name.replace("images-idx3", "labels-idx1"));
        if label_path.exists() {
            let labels = load_idx_labels(&label_path, is_gzip_path(&label_path))?;
            if labels.len() == set.len() {
                set.labels = Some(labels);
            }
        }
    }
    Ok(set)
}

/// Disjoint seeded random train/test subsets.
pub fn sample_split(
    set: &ImageSet,
    n_train: usize,
    n_test: usize,
    seed: u64,
) -> Result<(ImageSet, ImageSet)> {
    let needed = n_train + n_test;
    if needed > set.len() {
        return Err(Error::InsufficientImages {
            requested: needed,
            available: set.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = index::sample(&mut rng, set.len(), needed).into_vec();
    Ok((
        set.select(&picked[..n_train]),
        set.select(&picked[n_train..]),
    ))
}

/// Seeded random subset of `n` images.
pub fn sample_subset(set: &ImageSet, n: usize, seed: u64) -> Result<ImageSet> {
    Ok(sample_split(set, n, 0, seed)?.0)
}
