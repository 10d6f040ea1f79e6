//! Epoch driver for unsupervised STDP training, and population / WTA sweeps.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{apply_outcome, init_weights, run_presentation, NetworkConfig, SynapseMatrix};
use crate::readout::{self, EvalReport};
use crate::retina::{DogKernel, EncodedStimulus, LatencyVector};

pub const DEFAULT_EPOCHS: usize = 200;
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainPlan {
    pub epochs: usize,
    pub shuffle_each_epoch: bool,
    /// Training stops once an epoch's mean |Δw| falls below this.
    pub convergence_tol: f64,
    pub rng_seed: u64,
    pub network: NetworkConfig,
}

impl Default for TrainPlan {
    fn default() -> Self {
        Self {
            epochs: DEFAULT_EPOCHS,
            shuffle_each_epoch: true,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            rng_seed: 7,
            network: NetworkConfig::default(),
        }
    }
}

impl TrainPlan {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be at least 1".into()));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "convergence_tol must be >= 0, got {}",
                self.convergence_tol
            )));
        }
        self.network.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean over all matrix entries of |W_end − W_start| for the epoch.
    pub mean_abs_dw: f64,
    pub mean_winners: f64,
    /// Fraction of weights strictly inside (0.2, 0.8) at epoch end.
    pub mid_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainStats {
    pub epochs: Vec<EpochStats>,
}

impl TrainStats {
    pub fn final_epoch(&self) -> Option<usize> {
        self.epochs.last().map(|e| e.epoch)
    }
}

fn mid_fraction(w: &SynapseMatrix) -> f64 {
    let mid = w.as_slice().iter().filter(|&&x| x > 0.2 && x < 0.8).count();
    mid as f64 / w.as_slice().len() as f64
}

/// Presents every stimulus once in `order`, applying STDP to all winners after
/// each presentation.
pub fn train_epoch(
    stimuli: &[LatencyVector],
    w: &mut SynapseMatrix,
    cfg: &NetworkConfig,
    order: &[usize],
) -> Result<EpochStats> {
    cfg.validate()?;
    if cfg.n_neurons != w.n_neurons() {
        return Err(Error::DimensionMismatch {
            what: "neuron count",
            expected: w.n_neurons(),
            actual: cfg.n_neurons,
        });
    }
    if let Some(bad) = stimuli.iter().find(|s| s.n_afferents() != w.n_afferents()) {
        return Err(Error::DimensionMismatch {
            what: "afferent count",
            expected: w.n_afferents(),
            actual: bad.n_afferents(),
        });
    }
    if let Some(&i) = order.iter().find(|&&i| i >= stimuli.len()) {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: stimuli.len(),
        });
    }
    let before = w.clone();
    let mut winners = 0usize;
    for &i in order {
        let outcome = run_presentation(&stimuli[i], w, cfg.theta, cfg.wta_k);
        winners += outcome.spike_count();
        apply_outcome(w, &outcome, &stimuli[i], &cfg.stdp)?;
    }
    Ok(EpochStats {
        epoch: 0,
        mean_abs_dw: w.mean_abs_diff(&before)?,
        mean_winners: if order.is_empty() {
            0.0
        } else {
            winners as f64 / order.len() as f64
        },
        mid_fraction: mid_fraction(w),
    })
}

/// Trains a fresh network, with weights seeded by `plan.network.seed` and
/// presentation order by `plan.rng_seed`.
pub fn train(dataset: &[LatencyVector], plan: &TrainPlan) -> Result<(SynapseMatrix, TrainStats)> {
    plan.validate()?;
    let first = dataset.first().ok_or(Error::Empty("training set"))?;
    let mut w = init_weights(
        first.n_afferents(),
        plan.network.n_neurons,
        plan.network.seed,
    )?;
    let stats = train_from(dataset, plan, &mut w)?;
    Ok((w, stats))
}

/// Continues training from existing weights.
pub fn train_from(
    dataset: &[LatencyVector],
    plan: &TrainPlan,
    w: &mut SynapseMatrix,
) -> Result<TrainStats> {
    plan.validate()?;
    if dataset.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.rng_seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut stats = TrainStats::default();
    for epoch in 0..plan.epochs {
        if plan.shuffle_each_epoch {
            order.shuffle(&mut rng);
        }
        let mut es = train_epoch(dataset, w, &plan.network, &order)?;
        es.epoch = epoch;
        stats.epochs.push(es);
        if es.mean_abs_dw < plan.convergence_tol {
            break;
        }
    }
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepAxis {
    Population(Vec<usize>),
    Wta(Vec<usize>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Population(_) => "population",
            SweepAxis::Wta(_) => "wta",
        }
    }

    pub fn values(&self) -> &[usize] {
        match self {
            SweepAxis::Population(v) | SweepAxis::Wta(v) => v,
        }
    }

    /// Parses `population=10,50,100` or `wta=1,10`.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, list) = text
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("axis `{text}` is not of the form name=v1,v2")))?;
        let values = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad axis value `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::Config(format!("axis `{name}` has no values")));
        }
        match name.trim() {
            "population" | "neurons" => Ok(SweepAxis::Population(values)),
            "wta" | "wta_k" => Ok(SweepAxis::Wta(values)),
            other => Err(Error::Config(format!("unknown sweep axis `{other}`"))),
        }
    }

    /// The training plan for one axis value. Seeds are offset by the axis
    /// value itself, so a row does not depend on its position in the sweep.
    pub fn plan_for(&self, base: &TrainPlan, value: usize) -> TrainPlan {
        let mut plan = base.clone();
        match self {
            SweepAxis::Population(_) => plan.network.n_neurons = value,
            SweepAxis::Wta(_) => plan.network.wta_k = value,
        }
        plan.network.seed = base.network.seed.wrapping_add(value as u64);
        plan.rng_seed = base.rng_seed.wrapping_add(value as u64);
        plan
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: usize,
    pub n_neurons: usize,
    pub wta_k: usize,
    pub epochs_run: usize,
    pub train_error: f64,
    pub train_error_std: f64,
    pub test_error: f64,
    pub test_error_std: f64,
    pub mean_test_spikes: f64,
}

/// Trains and evaluates one network.
pub fn run_one(
    plan: &TrainPlan,
    kernel: &DogKernel,
    train_set: &[EncodedStimulus],
    test_set: &[EncodedStimulus],
) -> Result<(SynapseMatrix, TrainStats, EvalReport, EvalReport)> {
    let latencies: Vec<LatencyVector> = train_set.iter().map(|s| s.latencies.clone()).collect();
    let (w, stats) = train(&latencies, plan)?;
    let bank = readout::estimate_rf(
        &w,
        kernel,
        train_set
            .first()
            .ok_or(Error::Empty("training set"))?
            .contrast
            .shape(),
    )?;
    let train_report = readout::evaluate(&w, &bank, train_set, &plan.network)?;
    let test_report = readout::evaluate(&w, &bank, test_set, &plan.network)?;
    Ok((w, stats, train_report, test_report))
}

/// One fresh network per axis value; rows come back in axis order.
pub fn sweep(
    base: &TrainPlan,
    axis: &SweepAxis,
    kernel: &DogKernel,
    train_set: &[EncodedStimulus],
    test_set: &[EncodedStimulus],
) -> Result<Vec<SweepRow>> {
    if axis.values().is_empty() {
        return Err(Error::Config("empty sweep axis".into()));
    }
    if let Some(&v) = axis.values().iter().find(|&&v| v == 0) {
        return Err(Error::InvalidParameter(format!(
            "axis value {v} must be positive"
        )));
    }
    axis.values()
        .par_iter()
        .map(|&value| {
            let plan = axis.plan_for(base, value);
            let (_, stats, train_r, test_r) = run_one(&plan, kernel, train_set, test_set)?;
            Ok(SweepRow {
                axis_value: value,
                n_neurons: plan.network.n_neurons,
                wta_k: plan.network.wta_k,
                epochs_run: stats.epochs.len(),
                train_error: train_r.mean_error,
                train_error_std: train_r.error_std,
                test_error: test_r.mean_error,
                test_error_std: test_r.error_std,
                mean_test_spikes: test_r.mean_spikes,
            })
        })
        .collect()
}
