//! Shared helpers for the integration targets: an independent winner oracle
//! and the property checks, runnable either as individual tests or in bulk.

#![allow(dead_code)]

use latency_snn::dataio::{parse_idx_images, Checkpoint};
use latency_snn::readout::{estimate_rf, reconstruct, reconstruction_error, ResponseVector};
use latency_snn::retina::{latency_encode, signed_response, LgnActivityMap};
use latency_snn::stdp::{stdp_delta, StdpParams};
use latency_snn::training::{train, TrainPlan};
use latency_snn::{
    apply_stdp, membrane_trace, present, DogKernel, Grid, LatencyVector, Mode, NetworkConfig,
    SynapseMatrix,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn report<T: std::fmt::Debug>(
    name: &str,
    r: Result<(), proptest::test_runner::TestError<T>>,
) -> Result<(), String> {
    r.map_err(|e| format!("{name}: {e}"))
}

pub fn cfg(n: usize, theta: f64, wta_k: usize) -> NetworkConfig {
    NetworkConfig {
        n_neurons: n,
        theta,
        wta_k,
        ..NetworkConfig::default()
    }
}

/// Small random instance: `m ≤ 20` afferents, `n ≤ 5` neurons. Spike times
/// come from a five-value set and weights from a quarter grid so exact ties
/// are common.
#[derive(Debug, Clone)]
pub struct SmallInstance {
    pub m: usize,
    pub n: usize,
    pub times: Vec<Option<f64>>,
    pub weights: Vec<f32>,
    pub theta: f64,
}

impl SmallInstance {
    pub fn random(rng: &mut impl Rng) -> Self {
        let m = rng.gen_range(1..=20);
        let n = rng.gen_range(1..=5);
        let times = (0..m)
            .map(|_| rng.gen_bool(0.8).then(|| f64::from(rng.gen_range(1..=5u8))))
            .collect();
        let weights = (0..m * n)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    f32::from(rng.gen_range(0..=4u8)) / 4.0
                } else {
                    rng.gen::<f32>()
                }
            })
            .collect();
        let theta = if rng.gen_bool(0.5) {
            f64::from(rng.gen_range(1..=12u8)) / 4.0
        } else {
            rng.gen_range(0.1..6.0)
        };
        Self {
            m,
            n,
            times,
            weights,
            theta,
        }
    }

    pub fn latencies(&self) -> LatencyVector {
        LatencyVector::new(
            self.m,
            self.times
                .iter()
                .enumerate()
                .filter_map(|(i, t)| t.map(|t| (i, t))),
        )
        .unwrap()
    }

    pub fn matrix(&self) -> SynapseMatrix {
        SynapseMatrix::from_vec(self.m, self.n, self.weights.clone()).unwrap()
    }
}

/// First neuron to reach threshold by scanning each neuron's cumulative
/// potential on its own; ties go to the lowest index.
pub fn oracle_first_winner(inst: &SmallInstance) -> Option<(usize, f64)> {
    let lat = inst.latencies();
    let mut best: Option<(usize, f64)> = None;
    for j in 0..inst.n {
        let column: Vec<f32> = (0..inst.m).map(|i| inst.weights[i * inst.n + j]).collect();
        let trace = membrane_trace(&lat, &column).unwrap();
        let crossing = trace
            .steps()
            .iter()
            .find(|&&(_, v)| v >= inst.theta)
            .map(|&(t, _)| t);
        if let Some(t) = crossing {
            if best.is_none_or(|(_, bt)| t < bt) {
                best = Some((j, t));
            }
        }
    }
    best
}

/// Runs `count` random instances through `present` and the oracle and returns
/// the mismatches.
pub fn oracle_mismatches(count: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for case in 0..count {
        let inst = SmallInstance::random(&mut rng);
        let out = present(
            &inst.latencies(),
            &inst.matrix(),
            &cfg(inst.n, inst.theta, 1),
            Mode::Train,
        )
        .unwrap();
        let got = out.first().map(|w| (w.neuron, w.time));
        let want = oracle_first_winner(&inst);
        if got != want {
            bad.push(format!(
                "case {case}: present {got:?} oracle {want:?} ({inst:?})"
            ));
        }
    }
    bad
}

fn small_instance() -> impl Strategy<Value = SmallInstance> {
    any::<u64>().prop_map(|s| SmallInstance::random(&mut ChaCha8Rng::seed_from_u64(s)))
}

fn stdp_params() -> impl Strategy<Value = StdpParams> {
    (0.0..1.0f64, 0.0..1.0f64, 0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(ap, am, mp, mm)| StdpParams {
        alpha_plus: ap,
        alpha_minus: am,
        mu_plus: mp,
        mu_minus: mm,
    })
}

/// Random STDP updates, `updates` per case, never leave `[0, 1]`.
pub fn weight_boundedness(cases: u32, updates: usize) -> Result<(), String> {
    let r = runner(cases).run(&(stdp_params(), any::<u64>()), |(p, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, n) = (20, 5);
        let init = (0..m * n).map(|_| rng.gen::<f32>()).collect();
        let mut w = SynapseMatrix::from_vec(m, n, init).unwrap();
        for _ in 0..updates {
            let mask: Vec<bool> = (0..m).map(|_| rng.gen()).collect();
            apply_stdp(&mut w, rng.gen_range(0..n), &mask, &p).unwrap();
        }
        prop_assert!(w.as_slice().iter().all(|x| (0.0..=1.0).contains(x)));
        Ok(())
    });
    report("weight boundedness", r)
}

/// `stdp_delta` is non-negative for LTP and non-positive for LTD.
pub fn stdp_sign() -> Result<(), String> {
    let r = runner(512).run(&(stdp_params(), 0.0..=1.0f64), |(p, w)| {
        prop_assert!(stdp_delta(w, true, &p).unwrap() >= 0.0);
        prop_assert!(stdp_delta(w, false, &p).unwrap() <= 0.0);
        Ok(())
    });
    report("stdp sign", r)
}

/// Training mode never lets more than `wta_k` neurons fire; hard WTA gives at
/// most one winner.
pub fn wta_cardinality(cases: u32) -> Result<(), String> {
    let r = runner(cases).run(&(small_instance(), 1..=5usize), |(inst, k)| {
        let lat = inst.latencies();
        let w = inst.matrix();
        let hard = present(&lat, &w, &cfg(inst.n, inst.theta, 1), Mode::Train).unwrap();
        prop_assert!(hard.spike_count() <= 1);
        let k = k.min(inst.n);
        let soft = present(&lat, &w, &cfg(inst.n, inst.theta, k), Mode::Train).unwrap();
        prop_assert!(soft.spike_count() <= k);
        let test = present(&lat, &w, &cfg(inst.n, inst.theta, k), Mode::Test).unwrap();
        let mut ids: Vec<_> = test.winners.iter().map(|x| x.neuron).collect();
        ids.sort_unstable();
        ids.dedup();
        prop_assert_eq!(ids.len(), test.spike_count());
        Ok(())
    });
    report("wta cardinality", r)
}

/// Membrane potentials never decrease before the first crossing.
pub fn monotone_potentials(cases: u32) -> Result<(), String> {
    let r = runner(cases).run(&small_instance(), |inst| {
        let lat = inst.latencies();
        for j in 0..inst.n {
            let column: Vec<f32> = (0..inst.m).map(|i| inst.weights[i * inst.n + j]).collect();
            let trace = membrane_trace(&lat, &column).unwrap();
            prop_assert!(trace
                .steps()
                .windows(2)
                .all(|s| s[1].1 >= s[0].1 && s[1].0 > s[0].0));
        }
        Ok(())
    });
    report("monotone potentials", r)
}

fn activity_map(rows: usize, cols: usize) -> impl Strategy<Value = LgnActivityMap> {
    let cell = prop_oneof![Just(0.0), 1e-9..1e-6f64, 1e-6..5.0f64];
    (
        proptest::collection::vec(cell.clone(), rows * cols),
        proptest::collection::vec(cell, rows * cols),
    )
        .prop_map(move |(on, off)| LgnActivityMap {
            on: Grid::from_vec(rows, cols, on).unwrap(),
            off: Grid::from_vec(rows, cols, off).unwrap(),
        })
}

/// Stronger afferents spike strictly earlier; afferents below the floor stay
/// silent.
pub fn latency_monotonicity(cases: u32) -> Result<(), String> {
    let floor = 1e-6;
    let r = runner(cases).run(&activity_map(4, 5), |map| {
        let lat = latency_encode(&map, floor).unwrap();
        let x: Vec<f64> = map
            .on
            .as_slice()
            .iter()
            .chain(map.off.as_slice())
            .copied()
            .collect();
        let mut time = vec![None; x.len()];
        for s in lat.spikes() {
            time[s.afferent as usize] = Some(s.time);
        }
        for a in 0..x.len() {
            prop_assert_eq!(time[a].is_some(), x[a] >= floor);
            for b in 0..x.len() {
                if x[a] > x[b] && x[b] >= floor {
                    prop_assert!(time[a].unwrap() < time[b].unwrap());
                }
            }
        }
        Ok(())
    });
    report("latency monotonicity", r)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn grid(rows: usize, cols: usize, lo: f64, hi: f64) -> impl Strategy<Value = Grid> {
    proptest::collection::vec(lo..hi, rows * cols)
        .prop_map(move |v| Grid::from_vec(rows, cols, v).unwrap())
}

/// The center-surround response is linear in the image.
pub fn filter_linearity(cases: u32) -> Result<(), String> {
    let kernel = DogKernel::default();
    let r = runner(cases).run(
        &(
            grid(9, 11, 0.0, 1.0),
            grid(9, 11, 0.0, 1.0),
            -3.0..3.0f64,
            -3.0..3.0f64,
        ),
        |(i1, i2, a, b)| {
            let mut mix = i1.map(|v| a * v);
            mix.add_scaled(&i2, b).unwrap();
            let mut want = signed_response(&i1, &kernel).map(|v| a * v);
            want.add_scaled(&signed_response(&i2, &kernel), b).unwrap();
            let got = signed_response(&mix, &kernel);
            prop_assert!(max_abs_diff(got.as_slice(), want.as_slice()) < 1e-9);
            Ok(())
        },
    );
    report("filter linearity", r)
}

/// Weights on a 1/1024 grid in `[0, 0.5]`, so sums and halvings stay exact in
/// single precision.
fn half_weights(len: usize) -> impl Strategy<Value = Vec<f32>> {
    proptest::collection::vec((0..=512u16).prop_map(|q| f32::from(q) / 1024.0), len)
}

/// Receptive fields are linear in the weights and reconstruction is linear in
/// the response set.
pub fn readout_linearity(cases: u32) -> Result<(), String> {
    let kernel = DogKernel::default();
    let (rows, cols, n) = (7, 8, 4);
    let m = 2 * rows * cols;
    let r = runner(cases).run(
        &(
            half_weights(m * n),
            half_weights(m * n),
            proptest::collection::vec(0..3u8, n),
        ),
        |(w1, w2, split)| {
            let sum: Vec<f32> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
            let half: Vec<f32> = w1.iter().map(|a| a * 0.5).collect();
            let mat = |v: Vec<f32>| SynapseMatrix::from_vec(m, n, v).unwrap();
            let b1 = estimate_rf(&mat(w1.clone()), &kernel, (rows, cols)).unwrap();
            let b2 = estimate_rf(&mat(w2), &kernel, (rows, cols)).unwrap();
            let bs = estimate_rf(&mat(sum), &kernel, (rows, cols)).unwrap();
            let bh = estimate_rf(&mat(half), &kernel, (rows, cols)).unwrap();
            for j in 0..n {
                let (f1, f2) = (b1.fields()[j].as_slice(), b2.fields()[j].as_slice());
                let add: Vec<f64> = f1.iter().zip(f2).map(|(a, b)| a + b).collect();
                prop_assert!(max_abs_diff(bs.fields()[j].as_slice(), &add) < 1e-9);
                let scaled: Vec<f64> = f1.iter().map(|a| 0.5 * a).collect();
                prop_assert!(max_abs_diff(bh.fields()[j].as_slice(), &scaled) < 1e-9);
            }

            // split[j]: 0 silent, 1 in the first set, 2 in the second
            let pick = |s: u8| ResponseVector::from_bools(split.iter().map(|&x| x == s).collect());
            let union = ResponseVector::from_bools(split.iter().map(|&x| x != 0).collect());
            let mut parts = reconstruct(&pick(1), &b1).unwrap();
            parts
                .add_scaled(&reconstruct(&pick(2), &b1).unwrap(), 1.0)
                .unwrap();
            let whole = reconstruct(&union, &b1).unwrap();
            prop_assert!(max_abs_diff(whole.as_slice(), parts.as_slice()) < 1e-9);
            Ok(())
        },
    );
    report("readout linearity", r)
}

fn varied_grid(rows: usize, cols: usize) -> impl Strategy<Value = Grid> {
    grid(rows, cols, -5.0, 5.0).prop_filter("needs spread", |g| {
        let (lo, hi) = g.min_max();
        hi - lo > 1e-3
    })
}

/// The z-scored error is symmetric, invariant to positive affine maps of either
/// argument, and bounded by `[0, 4]`.
pub fn error_symmetry_affine(cases: u32) -> Result<(), String> {
    let r = runner(cases).run(
        &(
            varied_grid(6, 7),
            varied_grid(6, 7),
            0.01..100.0f64,
            -50.0..50.0f64,
        ),
        |(a, b, scale, shift)| {
            let e = reconstruction_error(&a, &b).unwrap();
            prop_assert!((0.0..=4.0 + 1e-12).contains(&e));
            prop_assert!((e - reconstruction_error(&b, &a).unwrap()).abs() < 1e-9);
            let a2 = a.map(|v| scale * v + shift);
            prop_assert!((e - reconstruction_error(&a2, &b).unwrap()).abs() < 1e-9);
            let b2 = b.map(|v| scale * v - shift);
            prop_assert!((e - reconstruction_error(&a, &b2).unwrap()).abs() < 1e-9);
            Ok(())
        },
    );
    report("error symmetry and affine invariance", r)
}

/// Checkpoint bytes decode to bit-identical weights and scalars.
pub fn checkpoint_round_trip(cases: u32) -> Result<(), String> {
    let strat = (
        1..12usize,
        1..6usize,
        any::<u32>(),
        0.01..100.0f64,
        stdp_params(),
        any::<u64>(),
    );
    let r = runner(cases).run(&strat, |(m, n, epoch, theta, stdp, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f32> = (0..m * n).map(|_| rng.gen()).collect();
        let ckpt = Checkpoint {
            epoch,
            theta,
            stdp,
            weights: SynapseMatrix::from_vec(m, n, w).unwrap(),
        };
        let back = Checkpoint::from_bytes(&ckpt.to_bytes()).unwrap();
        prop_assert_eq!(back.epoch, epoch);
        prop_assert_eq!(back.theta.to_bits(), theta.to_bits());
        prop_assert_eq!(back.stdp, stdp);
        let bits = |c: &Checkpoint| {
            c.weights
                .as_slice()
                .iter()
                .map(|x| x.to_bits())
                .collect::<Vec<_>>()
        };
        prop_assert_eq!(bits(&back), bits(&ckpt));
        prop_assert_eq!(
            (back.weights.n_afferents(), back.weights.n_neurons()),
            (m, n)
        );
        Ok(())
    });
    report("checkpoint round trip", r)
}

/// Hand-assembled IDX image file.
pub fn idx_bytes(count: u32, rows: u32, cols: u32, pixels: &[u8]) -> Vec<u8> {
    let mut b = vec![0, 0, 8, 3];
    for v in [count, rows, cols] {
        b.extend_from_slice(&v.to_be_bytes());
    }
    b.extend_from_slice(pixels);
    b
}

/// IDX images parse back byte for byte; any change to the magic or
/// dimension fields, and any truncation, is rejected.
pub fn idx_round_trip_and_fuzz(cases: u32) -> Result<(), String> {
    let strat = (
        0..4u32,
        any::<u64>(),
        0..16usize,
        1..=255u8,
        any::<prop::sample::Index>(),
    );
    let r = runner(cases).run(&strat, |(count, seed, at, flip, cut)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pixels: Vec<u8> = (0..count as usize * 784).map(|_| rng.gen()).collect();
        let bytes = idx_bytes(count, 28, 28, &pixels);
        let set = parse_idx_images(&bytes).unwrap();
        prop_assert_eq!(set.len(), count as usize);
        prop_assert_eq!(set.images.concat(), pixels);

        let mut mutated = bytes.clone();
        mutated[at] ^= flip;
        prop_assert!(
            parse_idx_images(&mutated).is_err(),
            "header byte {} ^ {:#x} accepted",
            at,
            flip
        );

        let len = cut.index(bytes.len());
        prop_assert!(parse_idx_images(&bytes[..len]).is_err());
        Ok(())
    });
    report("idx round trip and fuzz", r)
}

pub fn random_dataset(rng: &mut impl Rng, m: usize, count: usize) -> Vec<LatencyVector> {
    (0..count)
        .map(|_| {
            let mut pairs = Vec::new();
            for i in 0..m {
                if rng.gen_bool(0.6) {
                    pairs.push((i, rng.gen_range(0.1..10.0)));
                }
            }
            LatencyVector::new(m, pairs).unwrap()
        })
        .collect()
}

/// Same inputs, config and seeds give bit-identical weights, statistics and
/// presentation outcomes.
pub fn deterministic_reruns(cases: u32) -> Result<(), String> {
    let r = runner(cases).run(
        &(any::<u64>(), 1..4usize, 0.5..4.0f64),
        |(seed, k, theta)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = random_dataset(&mut rng, 24, 12);
            let plan = TrainPlan {
                epochs: 3,
                rng_seed: seed,
                network: NetworkConfig {
                    seed: seed.rotate_left(7),
                    ..cfg(4, theta, k)
                },
                ..TrainPlan::default()
            };
            let (w1, s1) = train(&data, &plan).unwrap();
            let (w2, s2) = train(&data, &plan).unwrap();
            let bits =
                |w: &SynapseMatrix| w.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&w1), bits(&w2));
            prop_assert_eq!(s1, s2);
            for lat in &data {
                let a = present(lat, &w1, &plan.network, Mode::Test).unwrap();
                let b = present(lat, &w2, &plan.network, Mode::Test).unwrap();
                prop_assert_eq!(a, b);
            }
            Ok(())
        },
    );
    report("deterministic reruns", r)
}
