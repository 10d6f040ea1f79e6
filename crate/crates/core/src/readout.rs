//! Linear readout: pixel-space receptive fields from learned weights, stimulus
//! reconstruction from binary population responses, and the z-scored
//! reconstruction error.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::network::{present, Mode, NetworkConfig, SynapseMatrix};
use crate::retina::{DogKernel, EncodedStimulus, LatencyVector};

#[derive(Debug, Clone, PartialEq)]
pub struct ReceptiveFieldBank {
    rows: usize,
    cols: usize,
    anchor: usize,
    fields: Vec<Grid>,
}

impl ReceptiveFieldBank {
    pub fn fields(&self) -> &[Grid] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }
}

/// Adds `coeff · kernel` to `field`, positioned as the pixel-space sensitivity
/// of the afferent at `(r, c)` (the adjoint of the zero-padded correlation in
/// the retina).
fn stamp(field: &mut Grid, kernel: &DogKernel, r: usize, c: usize, coeff: f64) {
    let (rows, cols) = field.shape();
    let a = kernel.anchor() as isize;
    for i in 0..kernel.size() {
        let rr = r as isize + i as isize - a;
        if rr < 0 || rr >= rows as isize {
            continue;
        }
        for j in 0..kernel.size() {
            let cc = c as isize + j as isize - a;
            if cc < 0 || cc >= cols as isize {
                continue;
            }
            let (rr, cc) = (rr as usize, cc as usize);
            field.set(rr, cc, field.get(rr, cc) + coeff * kernel.at(i, j));
        }
    }
}

/// Receptive field of every neuron: the weight-combination of its afferents'
/// kernels, ON afferents with `+kernel` and OFF afferents with `−kernel`.
pub fn estimate_rf(
    w: &SynapseMatrix,
    kernel: &DogKernel,
    (rows, cols): (usize, usize),
) -> Result<ReceptiveFieldBank> {
    let pixels = rows * cols;
    if w.n_afferents() != 2 * pixels {
        return Err(Error::DimensionMismatch {
            what: "afferents vs geometry",
            expected: 2 * pixels,
            actual: w.n_afferents(),
        });
    }
    let fields = (0..w.n_neurons())
        .into_par_iter()
        .map(|n| {
            let mut field = Grid::zeros(rows, cols);
            for p in 0..pixels {
                let coeff = f64::from(w.get(p, n)) - f64::from(w.get(pixels + p, n));
                if coeff != 0.0 {
                    stamp(&mut field, kernel, p / cols, p % cols, coeff);
                }
            }
            field
        })
        .collect();
    Ok(ReceptiveFieldBank {
        rows,
        cols,
        anchor: kernel.anchor(),
        fields,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseVector {
    responses: Vec<bool>,
    spike_count: usize,
}

impl ResponseVector {
    pub fn from_bools(responses: Vec<bool>) -> Self {
        let spike_count = responses.iter().filter(|&&r| r).count();
        Self {
            responses,
            spike_count,
        }
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.responses
    }

    pub fn spike_count(&self) -> usize {
        self.spike_count
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

/// Test-phase response: which neurons spike when every neuron may fire once
/// and no plasticity is applied.
pub fn responses(
    latencies: &LatencyVector,
    w: &SynapseMatrix,
    cfg: &NetworkConfig,
) -> Result<ResponseVector> {
    let outcome = present(latencies, w, cfg, Mode::Test)?;
    let mut r = vec![false; w.n_neurons()];
    for winner in &outcome.winners {
        r[winner.neuron] = true;
    }
    Ok(ResponseVector::from_bools(r))
}

/// Sum of the receptive fields of the neurons that responded.
pub fn reconstruct(r: &ResponseVector, bank: &ReceptiveFieldBank) -> Result<Grid> {
    if r.len() != bank.len() {
        return Err(Error::DimensionMismatch {
            what: "responses vs receptive fields",
            expected: bank.len(),
            actual: r.len(),
        });
    }
    let mut out = Grid::zeros(bank.rows, bank.cols);
    for (field, _) in bank.fields.iter().zip(&r.responses).filter(|(_, &on)| on) {
        out.add_scaled(field, 1.0)?;
    }
    Ok(out)
}

fn zscore(g: &Grid) -> Vec<f64> {
    let v = g.as_slice();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    if var <= 0.0 || !var.is_finite() {
        return vec![0.0; v.len()];
    }
    let sd = var.sqrt();
    v.iter().map(|x| (x - mean) / sd).collect()
}

/// Mean squared difference of the two maps after standardizing each to zero
/// mean and unit variance; constant maps standardize to all zeros.
pub fn reconstruction_error(reference: &Grid, reconstruction: &Grid) -> Result<f64> {
    reference.check_same_shape(reconstruction)?;
    if reference.as_slice().is_empty() {
        return Err(Error::Empty("reconstruction grid"));
    }
    let a = zscore(reference);
    let b = zscore(reconstruction);
    let sse: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sse / a.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub index: usize,
    pub error: f64,
    pub spike_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mean_error: f64,
    pub error_std: f64,
    pub mean_spikes: f64,
    pub records: Vec<ImageRecord>,
}

/// Neumaier-compensated sum, so aggregates do not depend on evaluation order
/// beyond the last bit.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Response, reconstruction and error for one stimulus.
pub fn evaluate_one(
    w: &SynapseMatrix,
    bank: &ReceptiveFieldBank,
    stimulus: &EncodedStimulus,
    cfg: &NetworkConfig,
) -> Result<(ResponseVector, Grid, f64)> {
    let r = responses(&stimulus.latencies, w, cfg)?;
    let or = reconstruct(&r, bank)?;
    let err = reconstruction_error(&stimulus.contrast, &or)?;
    Ok((r, or, err))
}

/// Mean and (population) standard deviation of per-image errors, plus mean
/// test spike count.
pub fn evaluate(
    w: &SynapseMatrix,
    bank: &ReceptiveFieldBank,
    dataset: &[EncodedStimulus],
    cfg: &NetworkConfig,
) -> Result<EvalReport> {
    if dataset.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    cfg.validate()?;
    let records = dataset
        .par_iter()
        .enumerate()
        .map(|(index, s)| {
            let (r, _, error) = evaluate_one(w, bank, s, cfg)?;
            Ok(ImageRecord {
                index,
                error,
                spike_count: r.spike_count(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = records.len() as f64;
    let mean_error = compensated_sum(records.iter().map(|r| r.error)) / n;
    let var = compensated_sum(records.iter().map(|r| (r.error - mean_error).powi(2))) / n;
    let mean_spikes = compensated_sum(records.iter().map(|r| r.spike_count as f64)) / n;
    Ok(EvalReport {
        mean_error,
        error_std: var.sqrt(),
        mean_spikes,
        records,
    })
}
