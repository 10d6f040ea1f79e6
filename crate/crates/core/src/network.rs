//! Integrate-and-fire V1 layer driven by latency-coded afferent spikes, with
//! winner-take-all inhibition and STDP.
//!
//! There is no leak and no delay: a neuron's potential at time `t` is the sum
//! of the weights of every afferent that has spiked by `t`. The simulation is
//! therefore event-ordered rather than time-stepped. Afferent spikes are
//! consumed in ascending `(time, afferent)` order; spikes sharing a time stamp
//! are integrated together before any threshold check, so simultaneous
//! crossings are resolved purely by neuron index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::retina::LatencyVector;
use crate::stdp::{StdpParams, WeightUpdate};

pub const DEFAULT_THETA: f64 = 20.0;
pub const DEFAULT_NEURONS: usize = 150;

/// Plastic afferent → neuron weights, stored row-major by afferent so that one
/// afferent spike touches one contiguous row.
#[derive(Debug, Clone, PartialEq)]
pub struct SynapseMatrix {
    n_afferents: usize,
    n_neurons: usize,
    weights: Vec<f32>,
}

impl SynapseMatrix {
    pub fn from_vec(n_afferents: usize, n_neurons: usize, weights: Vec<f32>) -> Result<Self> {
        if n_afferents == 0 || n_neurons == 0 {
            return Err(Error::Empty("synapse matrix dimensions"));
        }
        if weights.len() != n_afferents * n_neurons {
            return Err(Error::DimensionMismatch {
                what: "synapse matrix",
                expected: n_afferents * n_neurons,
                actual: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::Domain(f64::from(w)));
        }
        Ok(Self {
            n_afferents,
            n_neurons,
            weights,
        })
    }

    pub fn n_afferents(&self) -> usize {
        self.n_afferents
    }

    pub fn n_neurons(&self) -> usize {
        self.n_neurons
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.weights
    }

    #[inline]
    pub fn get(&self, afferent: usize, neuron: usize) -> f32 {
        self.weights[afferent * self.n_neurons + neuron]
    }

    #[inline]
    pub fn row(&self, afferent: usize) -> &[f32] {
        let start = afferent * self.n_neurons;
        &self.weights[start..start + self.n_neurons]
    }

    pub fn column(&self, neuron: usize) -> Vec<f32> {
        (0..self.n_afferents).map(|m| self.get(m, neuron)).collect()
    }

    pub fn set_column(&mut self, neuron: usize, values: &[f32]) -> Result<()> {
        if neuron >= self.n_neurons {
            return Err(Error::IndexOutOfRange {
                index: neuron,
                len: self.n_neurons,
            });
        }
        if values.len() != self.n_afferents {
            return Err(Error::DimensionMismatch {
                what: "weight column",
                expected: self.n_afferents,
                actual: values.len(),
            });
        }
        for (m, &v) in values.iter().enumerate() {
            self.weights[m * self.n_neurons + neuron] = v.clamp(0.0, 1.0);
        }
        Ok(())
    }

    pub(crate) fn column_strided_mut(&mut self, neuron: usize) -> impl Iterator<Item = &mut f32> {
        self.weights.iter_mut().skip(neuron).step_by(self.n_neurons)
    }

    /// Mean absolute entry-wise difference.
    pub fn mean_abs_diff(&self, other: &SynapseMatrix) -> Result<f64> {
        if self.weights.len() != other.weights.len() {
            return Err(Error::DimensionMismatch {
                what: "synapse matrix",
                expected: self.weights.len(),
                actual: other.weights.len(),
            });
        }
        let total: f64 = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| f64::from((a - b).abs()))
            .sum();
        Ok(total / self.weights.len() as f64)
    }
}

/// I.i.d. uniform `[0, 1)` weights from a seeded ChaCha8 stream.
pub fn init_weights(n_afferents: usize, n_neurons: usize, seed: u64) -> Result<SynapseMatrix> {
    if n_afferents == 0 || n_neurons == 0 {
        return Err(Error::Empty("synapse matrix dimensions"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = (0..n_afferents * n_neurons)
        .map(|_| rng.gen::<f32>())
        .collect();
    Ok(SynapseMatrix {
        n_afferents,
        n_neurons,
        weights,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub n_neurons: usize,
    pub theta: f64,
    /// Winners allowed per training presentation; 1 is hard WTA.
    pub wta_k: usize,
    pub stdp: StdpParams,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            n_neurons: DEFAULT_NEURONS,
            theta: DEFAULT_THETA,
            wta_k: 1,
            stdp: StdpParams::default(),
            seed: 42,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_neurons == 0 {
            return Err(Error::InvalidParameter("n_neurons must be positive".into()));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "theta must be positive, got {}",
                self.theta
            )));
        }
        if self.wta_k == 0 || self.wta_k > self.n_neurons {
            return Err(Error::InvalidParameter(format!(
                "wta_k must lie in [1, {}], got {}",
                self.n_neurons, self.wta_k
            )));
        }
        self.stdp.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Stops after `wta_k` winners.
    Train,
    /// Every neuron may fire once.
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winner {
    pub neuron: usize,
    pub time: f64,
    /// Length of the latency-vector prefix that had spiked at or before
    /// `time`; see [`PresentationOutcome::fired_mask`].
    pub fired_prefix: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PresentationOutcome {
    pub winners: Vec<Winner>,
}

impl PresentationOutcome {
    pub fn spike_count(&self) -> usize {
        self.winners.len()
    }

    pub fn first(&self) -> Option<&Winner> {
        self.winners.first()
    }

    /// Afferents that spiked at or before winner `i`'s spike.
    pub fn fired_mask(&self, i: usize, latencies: &LatencyVector) -> Vec<bool> {
        latencies.prefix_mask(self.winners[i].fired_prefix)
    }
}

fn check_dims(latencies: &LatencyVector, w: &SynapseMatrix, cfg: &NetworkConfig) -> Result<()> {
    if latencies.n_afferents() != w.n_afferents() {
        return Err(Error::DimensionMismatch {
            what: "afferent count",
            expected: w.n_afferents(),
            actual: latencies.n_afferents(),
        });
    }
    if cfg.n_neurons != w.n_neurons() {
        return Err(Error::DimensionMismatch {
            what: "neuron count",
            expected: w.n_neurons(),
            actual: cfg.n_neurons,
        });
    }
    Ok(())
}

/// Runs one stimulus presentation.
///
/// Potentials start at zero. Each time-group of afferent spikes adds its
/// weight rows to every neuron that has not yet fired; neurons at or above
/// `theta` fire in ascending index order until the winner budget (`wta_k` in
/// training, all neurons in testing) is used up. A fired neuron is refractory
/// for the rest of the presentation, the others keep integrating. Weights are
/// not touched here.
pub fn present(
    latencies: &LatencyVector,
    w: &SynapseMatrix,
    cfg: &NetworkConfig,
    mode: Mode,
) -> Result<PresentationOutcome> {
    cfg.validate()?;
    check_dims(latencies, w, cfg)?;
    let budget = match mode {
        Mode::Train => cfg.wta_k,
        Mode::Test => cfg.n_neurons,
    };
    Ok(run_presentation(latencies, w, cfg.theta, budget))
}

pub(crate) fn run_presentation(
    latencies: &LatencyVector,
    w: &SynapseMatrix,
    theta: f64,
    budget: usize,
) -> PresentationOutcome {
    let n = w.n_neurons();
    // Refractory neurons sit at -inf, which no finite weight can lift.
    let mut potential = vec![0.0f64; n];
    let mut winners = Vec::with_capacity(budget.min(n));
    let spikes = latencies.spikes();
    let mut i = 0;
    while i < spikes.len() {
        let t = spikes[i].time;
        let mut end = i;
        while end < spikes.len() && spikes[end].time == t {
            let row = w.row(spikes[end].afferent as usize);
            for (p, &wt) in potential.iter_mut().zip(row) {
                *p += f64::from(wt);
            }
            end += 1;
        }
        if potential.iter().any(|&p| p >= theta) {
            for (neuron, p) in potential.iter_mut().enumerate() {
                if *p >= theta {
                    *p = f64::NEG_INFINITY;
                    winners.push(Winner {
                        neuron,
                        time: t,
                        fired_prefix: end,
                    });
                    if winners.len() == budget {
                        return PresentationOutcome { winners };
                    }
                }
            }
        }
        i = end;
    }
    PresentationOutcome { winners }
}

/// Hard winner-take-all over a vector of inputs: a single 1 at the maximum,
/// ties going to the lowest index.
pub fn wta_select(inputs: &[f64]) -> Result<Vec<u8>> {
    if inputs.is_empty() {
        return Err(Error::Empty("wta inputs"));
    }
    let mut best = 0;
    for (i, &x) in inputs.iter().enumerate().skip(1) {
        if x > inputs[best] {
            best = i;
        }
    }
    let mut out = vec![0u8; inputs.len()];
    out[best] = 1;
    Ok(out)
}

/// Right-continuous step function `E(t)` for one neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct MembraneTrace {
    /// `(time, value from this time on)`, strictly increasing times.
    steps: Vec<(f64, f64)>,
}

impl MembraneTrace {
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.steps.partition_point(|&(s, _)| s <= t);
        if k == 0 {
            0.0
        } else {
            self.steps[k - 1].1
        }
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    /// Earliest time at which the trace reaches `theta`.
    pub fn first_crossing(&self, theta: f64) -> Option<f64> {
        self.steps
            .iter()
            .find(|&&(_, v)| v >= theta)
            .map(|&(t, _)| t)
    }
}

/// Cumulative sum of `weight_column` over afferent spikes in time order.
pub fn membrane_trace(latencies: &LatencyVector, weight_column: &[f32]) -> Result<MembraneTrace> {
    if weight_column.len() != latencies.n_afferents() {
        return Err(Error::DimensionMismatch {
            what: "weight column",
            expected: latencies.n_afferents(),
            actual: weight_column.len(),
        });
    }
    let mut steps: Vec<(f64, f64)> = Vec::new();
    let mut acc = 0.0f64;
    for s in latencies.spikes() {
        acc += f64::from(weight_column[s.afferent as usize]);
        match steps.last_mut() {
            Some(last) if last.0 == s.time => last.1 = acc,
            _ => steps.push((s.time, acc)),
        }
    }
    Ok(MembraneTrace { steps })
}

/// Applies STDP to `winner`'s column: LTP where `fired_mask` is set, LTD
/// everywhere else (including afferents that never spiked). Results are
/// clamped to `[0, 1]`.
pub fn apply_stdp(
    w: &mut SynapseMatrix,
    winner: usize,
    fired_mask: &[bool],
    params: &StdpParams,
) -> Result<()> {
    if winner >= w.n_neurons() {
        return Err(Error::IndexOutOfRange {
            index: winner,
            len: w.n_neurons(),
        });
    }
    if fired_mask.len() != w.n_afferents() {
        return Err(Error::DimensionMismatch {
            what: "fired mask",
            expected: w.n_afferents(),
            actual: fired_mask.len(),
        });
    }
    let kernel = WeightUpdate::new(params);
    for (wt, &fired) in w.column_strided_mut(winner).zip(fired_mask) {
        *wt = kernel.apply(*wt, fired);
    }
    Ok(())
}

/// Applies STDP for every winner of a training presentation.
///
/// Equivalent to calling [`apply_stdp`] once per winner with its fired mask.
/// Winners are distinct neurons, so each touches only its own column and the
/// result does not depend on update order; the update runs row by row so all
/// winners share one pass over the matrix.
pub fn apply_outcome(
    w: &mut SynapseMatrix,
    outcome: &PresentationOutcome,
    latencies: &LatencyVector,
    params: &StdpParams,
) -> Result<()> {
    if latencies.n_afferents() != w.n_afferents() {
        return Err(Error::DimensionMismatch {
            what: "afferent count",
            expected: w.n_afferents(),
            actual: latencies.n_afferents(),
        });
    }
    if let Some(bad) = outcome.winners.iter().find(|x| x.neuron >= w.n_neurons()) {
        return Err(Error::IndexOutOfRange {
            index: bad.neuron,
            len: w.n_neurons(),
        });
    }
    if outcome.winners.is_empty() {
        return Ok(());
    }
    // Position of each afferent in spike order; silent afferents never
    // fall inside a winner's fired prefix.
    let mut rank = vec![usize::MAX; w.n_afferents()];
    for (pos, s) in latencies.spikes().iter().enumerate() {
        rank[s.afferent as usize] = pos;
    }
    let kernel = WeightUpdate::new(params);
    let n = w.n_neurons();
    for (m, row) in w.weights.chunks_exact_mut(n).enumerate() {
        let r = rank[m];
        for winner in &outcome.winners {
            let wt = &mut row[winner.neuron];
            *wt = kernel.apply(*wt, r < winner.fired_prefix);
        }
    }
    Ok(())
}
