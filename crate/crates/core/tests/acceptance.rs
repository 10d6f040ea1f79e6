//! End-to-end acceptance checks on the bundled Fashion-MNIST subset.
//!
//! Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use latency_snn::cli::{encode_set, load_splits};
use latency_snn::config::RunConfig;
use latency_snn::readout::{estimate_rf, evaluate};
use latency_snn::retina::EncodedStimulus;
use latency_snn::stdp::{stdp_delta, StdpParams};
use latency_snn::training::{sweep, SweepAxis, SweepRow, TrainPlan};
use latency_snn::{init_weights, DogKernel};

const POPULATION: [usize; 6] = [10, 50, 100, 150, 200, 250];
const WTA: [usize; 5] = [1, 10, 50, 100, 150];

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Fixture {
    kernel: DogKernel,
    plan: TrainPlan,
    train: Vec<EncodedStimulus>,
    test: Vec<EncodedStimulus>,
}

fn fixture() -> Result<Fixture, String> {
    let data =
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/fashion-images-idx3-ubyte.gz");
    let cfg = RunConfig {
        train_images: Some(data),
        ..RunConfig::default()
    };
    let retina = cfg.retina().map_err(|e| e.to_string())?;
    let (train, test) = load_splits(&cfg).map_err(|e| e.to_string())?;
    Ok(Fixture {
        plan: cfg.plan(),
        train: encode_set(&retina, &train).map_err(|e| e.to_string())?,
        test: encode_set(&retina, &test).map_err(|e| e.to_string())?,
        kernel: retina.kernel,
    })
}

fn row(rows: &[SweepRow], value: usize) -> &SweepRow {
    rows.iter()
        .find(|r| r.axis_value == value)
        .expect("axis value present")
}

fn fmt_series(rows: &[SweepRow], f: impl Fn(&SweepRow) -> f64) -> String {
    rows.iter()
        .map(|r| format!("{}:{:.4}", r.axis_value, f(r)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn population_trend(rows: &[SweepRow], seconds: f64) -> Outcome {
    let train_ok = rows.windows(2).all(|w| {
        w[1].train_error <= w[0].train_error
            || (w[1].train_error - w[0].train_error).abs() < 0.02 * w[0].train_error
    });
    let (e10, e150, e250) = (
        row(rows, 10).test_error,
        row(rows, 150).test_error,
        row(rows, 250).test_error,
    );
    let plateau = (e150 - e250).abs() < 0.15 * e150;
    let fast = seconds < 1800.0;
    check(
        train_ok && e150 < e10 && plateau && fast,
        format!(
            "train [{}]; test(150)={e150:.4} test(10)={e10:.4} test(250)={e250:.4}; sweep took {seconds:.0}s",
            fmt_series(rows, |r| r.train_error)
        ),
    )
}

fn spike_growth(rows: &[SweepRow]) -> Outcome {
    let increasing = rows
        .windows(2)
        .all(|w| w[1].mean_test_spikes > w[0].mean_test_spikes);
    let ratio = row(rows, 200).mean_test_spikes / row(rows, 150).mean_test_spikes;
    check(
        increasing && ratio >= 1.4,
        format!(
            "spikes [{}]; spikes(200)/spikes(150)={ratio:.3} (need >= 1.4)",
            fmt_series(rows, |r| r.mean_test_spikes)
        ),
    )
}

fn sparseness(rows: &[SweepRow]) -> Outcome {
    let s = row(rows, 150).mean_test_spikes;
    check(
        s <= 60.0,
        format!("mean test spikes at N=150 = {s:.2} (need <= 60)"),
    )
}

fn wta_trend(rows: &[SweepRow]) -> Outcome {
    let nondecreasing = rows.windows(2).all(|w| w[1].test_error >= w[0].test_error);
    let (e1, e150) = (row(rows, 1).test_error, row(rows, 150).test_error);
    check(
        nondecreasing && e150 > 1.05 * e1,
        format!(
            "test [{}]; error(150)/error(1)={:.3} (need > 1.05, non-decreasing)",
            fmt_series(rows, |r| r.test_error),
            e150 / e1
        ),
    )
}

fn learning_beats_untrained(fx: &Fixture, rows: &[SweepRow]) -> Result<Outcome, String> {
    let trained = row(rows, 150).test_error;
    let plan = SweepAxis::Population(vec![150]).plan_for(&fx.plan, 150);
    let m = fx.test[0].latencies.n_afferents();
    let w = init_weights(m, 150, plan.network.seed).map_err(|e| e.to_string())?;
    let (r, c) = fx.test[0].contrast.shape();
    let bank = estimate_rf(&w, &fx.kernel, (r, c)).map_err(|e| e.to_string())?;
    let untrained = evaluate(&w, &bank, &fx.test, &plan.network)
        .map_err(|e| e.to_string())?
        .mean_error;
    Ok(check(
        trained < untrained,
        format!("trained {trained:.4} vs untrained {untrained:.4}"),
    ))
}

fn oracle() -> Outcome {
    let t = Instant::now();
    let bad = common::oracle_mismatches(1_000, 6);
    check(
        bad.is_empty(),
        format!(
            "{} mismatches in 1000 instances ({:.2}s){}",
            bad.len(),
            t.elapsed().as_secs_f64(),
            bad.first()
                .map(|b| format!("; first: {b}"))
                .unwrap_or_default()
        ),
    )
}

fn properties() -> Outcome {
    let results = [
        common::weight_boundedness(1, 100_000),
        common::wta_cardinality(1_000),
        common::latency_monotonicity(256),
        common::filter_linearity(64),
        common::readout_linearity(48),
        common::error_symmetry_affine(512),
        common::checkpoint_round_trip(256),
        common::idx_round_trip_and_fuzz(256),
        common::deterministic_reruns(16),
    ];
    let failures: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    check(
        failures.is_empty(),
        if failures.is_empty() {
            "9 property groups".to_string()
        } else {
            failures.join("; ")
        },
    )
}

fn stdp_spot_checks() -> Outcome {
    let p = StdpParams::default();
    let ltp = stdp_delta(0.5, true, &p).unwrap();
    let ltd = stdp_delta(0.5, false, &p).unwrap();
    // 5e-3 · 0.5^0.65 and 3.75e-3 · 0.5^0.05, evaluated by hand
    let ok = (ltp - 3.187e-3).abs() < 1e-6 && (ltd + 3.622e-3).abs() < 1e-6;
    check(ok, format!("LTP {ltp:.6e}, LTD {ltd:.6e}"))
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();

    match fixture() {
        Ok(fx) => {
            eprintln!(
                "training on {} images, testing on {}, {} epochs max",
                fx.train.len(),
                fx.test.len(),
                fx.plan.epochs
            );
            let t = Instant::now();
            let pop = sweep(
                &fx.plan,
                &SweepAxis::Population(POPULATION.to_vec()),
                &fx.kernel,
                &fx.train,
                &fx.test,
            );
            let pop_secs = t.elapsed().as_secs_f64();
            let wta_base = SweepAxis::Population(vec![150]).plan_for(&fx.plan, 150);
            let wta = sweep(
                &wta_base,
                &SweepAxis::Wta(WTA.to_vec()),
                &fx.kernel,
                &fx.train,
                &fx.test,
            );
            match pop {
                Ok(rows) => {
                    results.push((
                        1,
                        "error falls with population size",
                        population_trend(&rows, pop_secs),
                    ));
                    results.push((
                        2,
                        "spike count grows with population size",
                        spike_growth(&rows),
                    ));
                    results.push((3, "sparse test responses at 150 neurons", sparseness(&rows)));
                    let learned =
                        learning_beats_untrained(&fx, &rows).unwrap_or_else(|e| check(false, e));
                    results.push((5, "training beats untrained weights", learned));
                }
                Err(e) => {
                    for (i, name) in [
                        (1, "population sweep"),
                        (2, "population sweep"),
                        (3, "population sweep"),
                        (5, "population sweep"),
                    ] {
                        results.push((i, name, check(false, e.to_string())));
                    }
                }
            }
            let wta_outcome = match wta {
                Ok(rows) => wta_trend(&rows),
                Err(e) => check(false, e.to_string()),
            };
            results.push((4, "softer competition raises error", wta_outcome));
        }
        Err(e) => {
            for i in [1, 2, 3, 4, 5] {
                results.push((i, "dataset", check(false, format!("cannot load data: {e}"))));
            }
        }
    }
    results.push((6, "first winner matches oracle", oracle()));
    results.push((7, "property suite", properties()));
    results.push((8, "plasticity closed forms", stdp_spot_checks()));
    results.sort_by_key(|r| r.0);

    for (i, name, o) in &results {
        println!(
            "acceptance {i}: {} | {name} | {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
