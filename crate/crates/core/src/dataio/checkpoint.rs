//! `SSPK` weight checkpoints.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "SSPK" | u32 version | u32 M | u32 N | u32 epoch
//! f64 theta | f64 alpha_plus | f64 alpha_minus | f64 mu_plus | f64 mu_minus
//! f32 weights[M * N]   (row-major, afferent-major)
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::SynapseMatrix;
use crate::stdp::StdpParams;

pub const MAGIC: [u8; 4] = *b"SSPK";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 * 4 + 5 * 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub epoch: u32,
    pub theta: f64,
    pub stdp: StdpParams,
    pub weights: SynapseMatrix,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let w = &self.weights;
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * w.as_slice().len());
        out.extend_from_slice(&MAGIC);
        for v in [
            VERSION,
            w.n_afferents() as u32,
            w.n_neurons() as u32,
            self.epoch,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let p = &self.stdp;
        for v in [
            self.theta,
            p.alpha_plus,
            p.alpha_minus,
            p.mu_plus,
            p.mu_minus,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in w.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Truncated {
                expected: HEADER_LEN,
                actual: bytes.len(),
            });
        }
        if bytes[..4] != MAGIC {
            return Err(Error::BadMagic {
                expected: u32::from_be_bytes(MAGIC),
                found: u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]),
            });
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(Error::VersionMismatch {
                expected: VERSION,
                found: version,
            });
        }
        let m = u32_at(8) as usize;
        let n = u32_at(12) as usize;
        let epoch = u32_at(16);
        let theta = f64_at(20);
        let stdp = StdpParams {
            alpha_plus: f64_at(28),
            alpha_minus: f64_at(36),
            mu_plus: f64_at(44),
            mu_minus: f64_at(52),
        };
        let payload = &bytes[HEADER_LEN..];
        if !payload.len().is_multiple_of(4) || payload.len() / 4 != m * n {
            return Err(Error::SizeMismatch {
                expected: m * n,
                actual: payload.len() / 4,
            });
        }
        let weights = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Ok(Self {
            epoch,
            theta,
            stdp,
            weights: SynapseMatrix::from_vec(m, n, weights)?,
        })
    }
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    fs::write(path, ckpt.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_bytes(&bytes)
}
