//! Retinal front end: difference-of-Gaussians center-surround filtering into
//! ON/OFF activity maps, and conversion of those maps into first-spike
//! latencies.
//!
//! Afferents are numbered ON block first, then OFF block, each row-major, so a
//! 28×28 image yields `M = 2·28·28 = 1568` afferents.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::Grid;

pub const DEFAULT_SIGMA_CENTER: f64 = 1.0;
pub const DEFAULT_SIGMA_SURROUND: f64 = 2.0;
pub const DEFAULT_KERNEL_SIZE: usize = 6;
pub const DEFAULT_ACTIVITY_FLOOR: f64 = 1e-6;

/// Zero-sum difference-of-Gaussians kernel on a `size × size` grid, anchored at
/// cell `(size / 2, size / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DogKernel {
    size: usize,
    sigma_center: f64,
    sigma_surround: f64,
    weights: Vec<f64>,
}

fn gaussian(sigma: f64, dy: f64, dx: f64) -> f64 {
    let s2 = sigma * sigma;
    (-(dx * dx + dy * dy) / (2.0 * s2)).exp() / (2.0 * PI * s2)
}

impl DogKernel {
    pub fn new(sigma_center: f64, sigma_surround: f64, size: usize) -> Result<Self> {
        if !(sigma_center > 0.0 && sigma_center < sigma_surround && sigma_surround.is_finite()) {
            return Err(Error::InvalidSigma {
                center: sigma_center,
                surround: sigma_surround,
            });
        }
        if size < 2 {
            return Err(Error::InvalidSize(size));
        }
        let anchor = (size / 2) as f64;
        let mut weights = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                let dy = i as f64 - anchor;
                let dx = j as f64 - anchor;
                weights.push(gaussian(sigma_center, dy, dx) - gaussian(sigma_surround, dy, dx));
            }
        }
        let mean = weights.iter().sum::<f64>() / weights.len() as f64;
        weights.iter_mut().for_each(|w| *w -= mean);
        Ok(Self {
            size,
            sigma_center,
            sigma_surround,
            weights,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn anchor(&self) -> usize {
        self.size / 2
    }

    pub fn sigma_center(&self) -> f64 {
        self.sigma_center
    }

    pub fn sigma_surround(&self) -> f64 {
        self.sigma_surround
    }

    /// Row-major coefficients.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.size + j]
    }
}

impl Default for DogKernel {
    fn default() -> Self {
        Self::new(
            DEFAULT_SIGMA_CENTER,
            DEFAULT_SIGMA_SURROUND,
            DEFAULT_KERNEL_SIZE,
        )
        .expect("default kernel parameters are valid")
    }
}

pub fn make_dog_kernel(sigma_center: f64, sigma_surround: f64, size: usize) -> Result<DogKernel> {
    DogKernel::new(sigma_center, sigma_surround, size)
}

/// Rectified ON/OFF responses of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct LgnActivityMap {
    pub on: Grid,
    pub off: Grid,
}

impl LgnActivityMap {
    pub fn shape(&self) -> (usize, usize) {
        self.on.shape()
    }

    /// Signed contrast map `on - off`, i.e. the unrectified response.
    pub fn contrast(&self) -> Grid {
        let mut out = self.on.clone();
        out.add_scaled(&self.off, -1.0)
            .expect("on and off share a shape");
        out
    }

    pub fn n_afferents(&self) -> usize {
        2 * self.on.rows() * self.on.cols()
    }
}

/// Zero-padded same-size correlation of `image` with `kernel`.
pub fn signed_response(image: &Grid, kernel: &DogKernel) -> Grid {
    let (rows, cols) = image.shape();
    let k = kernel.size();
    let a = kernel.anchor() as isize;
    let mut out = Grid::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = 0.0;
            for i in 0..k {
                let rr = r as isize + i as isize - a;
                if rr < 0 || rr >= rows as isize {
                    continue;
                }
                for j in 0..k {
                    let cc = c as isize + j as isize - a;
                    if cc < 0 || cc >= cols as isize {
                        continue;
                    }
                    acc += kernel.at(i, j) * image.get(rr as usize, cc as usize);
                }
            }
            out.set(r, c, acc);
        }
    }
    out
}

/// Filter `image` and split the signed response into ON (positive part) and
/// OFF (negative part) maps.
pub fn encode_lgn(image: &Grid, kernel: &DogKernel) -> Result<LgnActivityMap> {
    if image.rows() == 0 || image.cols() == 0 {
        return Err(Error::Empty("image"));
    }
    if let Some(&bad) = image.as_slice().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidParameter(format!(
            "image value {bad} outside [0, 1]"
        )));
    }
    let s = signed_response(image, kernel);
    Ok(LgnActivityMap {
        on: s.map(|v| v.max(0.0)),
        off: s.map(|v| (-v).max(0.0)),
    })
}

/// One afferent spike.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spike {
    pub afferent: u32,
    pub time: f64,
}

/// First-spike times of the afferents that fire, sorted by `(time, afferent)`.
/// Silent afferents are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyVector {
    n_afferents: usize,
    spikes: Vec<Spike>,
}

impl LatencyVector {
    /// Builds a latency vector from arbitrary-order `(afferent, time)` pairs.
    pub fn new(n_afferents: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut seen = vec![false; n_afferents];
        let mut spikes = Vec::new();
        for (afferent, time) in pairs {
            if afferent >= n_afferents {
                return Err(Error::IndexOutOfRange {
                    index: afferent,
                    len: n_afferents,
                });
            }
            if !(time > 0.0 && time.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "spike time {time} must be positive and finite"
                )));
            }
            if std::mem::replace(&mut seen[afferent], true) {
                return Err(Error::InvalidParameter(format!(
                    "afferent {afferent} spikes twice"
                )));
            }
            spikes.push(Spike {
                afferent: afferent as u32,
                time,
            });
        }
        spikes.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.afferent.cmp(&b.afferent)));
        Ok(Self {
            n_afferents,
            spikes,
        })
    }

    pub fn empty(n_afferents: usize) -> Self {
        Self {
            n_afferents,
            spikes: Vec::new(),
        }
    }

    pub fn n_afferents(&self) -> usize {
        self.n_afferents
    }

    /// Spikes in processing order.
    pub fn spikes(&self) -> &[Spike] {
        &self.spikes
    }

    pub fn len(&self) -> usize {
        self.spikes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spikes.is_empty()
    }

    /// Boolean mask over afferents that spiked among the first `count` spikes.
    pub fn prefix_mask(&self, count: usize) -> Vec<bool> {
        let mut mask = vec![false; self.n_afferents];
        for s in &self.spikes[..count] {
            mask[s.afferent as usize] = true;
        }
        mask
    }

    /// Number of spikes with time `<= t`.
    pub fn count_until(&self, t: f64) -> usize {
        self.spikes.partition_point(|s| s.time <= t)
    }
}

/// Inverse-activity latency code: afferent activity `x >= activity_floor`
/// spikes at `1 / x`, weaker afferents stay silent.
pub fn latency_encode(map: &LgnActivityMap, activity_floor: f64) -> Result<LatencyVector> {
    if !(activity_floor > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "activity_floor must be positive, got {activity_floor}"
        )));
    }
    let activities = map.on.as_slice().iter().chain(map.off.as_slice());
    let pairs = activities
        .enumerate()
        .filter(|(_, &x)| x >= activity_floor)
        .map(|(i, &x)| (i, 1.0 / x));
    LatencyVector::new(map.n_afferents(), pairs)
}

/// Everything the network and the readout need from one image.
#[derive(Debug, Clone)]
pub struct EncodedStimulus {
    pub latencies: LatencyVector,
    /// Signed contrast map (ON − OFF), the reconstruction target.
    pub contrast: Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Retina {
    pub kernel: DogKernel,
    pub activity_floor: f64,
}

impl Default for Retina {
    fn default() -> Self {
        Self {
            kernel: DogKernel::default(),
            activity_floor: DEFAULT_ACTIVITY_FLOOR,
        }
    }
}

impl Retina {
    pub fn encode(&self, image: &Grid) -> Result<EncodedStimulus> {
        let map = encode_lgn(image, &self.kernel)?;
        Ok(EncodedStimulus {
            latencies: latency_encode(&map, self.activity_floor)?,
            contrast: map.contrast(),
        })
    }

    pub fn encode_bytes(&self, rows: usize, cols: usize, bytes: &[u8]) -> Result<EncodedStimulus> {
        self.encode(&Grid::from_bytes(rows, cols, bytes)?)
    }
}
