//! Command implementations behind the `latency-snn` binary.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfig;
use crate::dataio::{self, Checkpoint, ImageSet, Series};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::readout::{self, ImageRecord};
use crate::retina::{encode_lgn, EncodedStimulus, Retina};
use crate::training::{self, SweepAxis};

#[derive(Debug, Parser)]
#[command(
    name = "latency-snn",
    version,
    about = "Spike-latency sparse coding of images with STDP and winner-take-all inhibition"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a network and write checkpoint, stats and receptive fields.
    Train {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate a checkpoint on the test split.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Train and evaluate one network per axis value.
    Sweep {
        /// `population=10,50,...` or `wta=1,10,...`
        #[arg(long)]
        axis: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Render the receptive fields stored in a checkpoint.
    ExportRf {
        #[arg(long)]
        checkpoint: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Dump ON/OFF activity maps of the first few training images.
    Encode {
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub train_images: Option<PathBuf>,
    #[arg(long)]
    pub test_images: Option<PathBuf>,
    #[arg(long)]
    pub neurons: Option<usize>,
    #[arg(long)]
    pub wta_k: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
}

impl CommonArgs {
    /// Flags > config file > defaults.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.train_images {
            cfg.train_images = Some(v.clone());
        }
        if let Some(v) = &self.test_images {
            cfg.test_images = Some(v.clone());
        }
        if let Some(v) = self.neurons {
            cfg.neurons = v;
        }
        if let Some(v) = self.wta_k {
            cfg.wta_k = v;
        }
        if let Some(v) = self.theta {
            cfg.theta = v;
        }
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { common } => cmd_train(&common),
        Command::Eval { checkpoint, common } => cmd_eval(&checkpoint, &common),
        Command::Sweep { axis, common } => cmd_sweep(&axis, &common),
        Command::ExportRf { checkpoint, common } => cmd_export_rf(&checkpoint, &common),
        Command::Encode { count, common } => cmd_encode(count, &common),
    }
}

fn prepare_out(out: &Path, cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = out.join("config.toml");
    fs::write(&path, cfg.to_toml_string()).map_err(|e| Error::io(path, e))
}

fn train_path(cfg: &RunConfig) -> Result<&Path> {
    cfg.train_images.as_deref().ok_or_else(|| {
        Error::Config("no training images given (--train-images or train_images)".into())
    })
}

/// Train and test image subsets as the config describes them.
pub fn load_splits(cfg: &RunConfig) -> Result<(ImageSet, ImageSet)> {
    let train_file = dataio::load_image_set(train_path(cfg)?)?;
    match &cfg.test_images {
        Some(test_path) => {
            let test_file = dataio::load_image_set(test_path)?;
            Ok((
                dataio::sample_subset(&train_file, cfg.n_train, cfg.split_seed)?,
                dataio::sample_subset(&test_file, cfg.n_test, cfg.split_seed.wrapping_add(1))?,
            ))
        }
        None => dataio::sample_split(&train_file, cfg.n_train, cfg.n_test, cfg.split_seed),
    }
}

pub fn encode_set(retina: &Retina, set: &ImageSet) -> Result<Vec<EncodedStimulus>> {
    set.images
        .iter()
        .map(|im| retina.encode_bytes(set.rows, set.cols, im))
        .collect()
}

fn write_rf_montage(w: &crate::network::SynapseMatrix, retina: &Retina, path: &Path) -> Result<()> {
    let side = ((w.n_afferents() / 2) as f64).sqrt() as usize;
    let bank = readout::estimate_rf(w, &retina.kernel, (side, side))?;
    let per_row = (bank.len() as f64).sqrt().ceil() as usize;
    dataio::write_image_grid(bank.fields(), per_row, path)
}

pub fn cmd_train(args: &CommonArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let retina = cfg.retina()?;
    let (train_set, _) = load_splits(&cfg)?;
    let stimuli = encode_set(&retina, &train_set)?;
    let latencies: Vec<_> = stimuli.into_iter().map(|s| s.latencies).collect();
    let plan = cfg.plan();
    let (w, stats) = training::train(&latencies, &plan)?;

    prepare_out(&args.out, &cfg)?;
    dataio::save_checkpoint(
        &args.out.join("checkpoint.sspk"),
        &Checkpoint {
            epoch: stats.epochs.len() as u32,
            theta: cfg.theta,
            stdp: cfg.stdp(),
            weights: w.clone(),
        },
    )?;
    dataio::write_csv(&stats.epochs, &args.out.join("train_stats.csv"))?;
    write_rf_montage(&w, &retina, &args.out.join("receptive_fields.png"))?;
    eprintln!(
        "trained {} neurons for {} epochs; wrote {}",
        cfg.neurons,
        stats.epochs.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct EvalSummary {
    mean_error: f64,
    error_std: f64,
    mean_spikes: f64,
}

pub fn cmd_eval(checkpoint: &Path, args: &CommonArgs) -> Result<()> {
    let mut cfg = args.resolve()?;
    let ckpt = dataio::load_checkpoint(checkpoint)?;
    let retina = cfg.retina()?;
    let (_, test_set) = load_splits(&cfg)?;
    if test_set.is_empty() {
        return Err(Error::Empty("test split"));
    }
    let expected_m = 2 * test_set.rows * test_set.cols;
    if ckpt.weights.n_afferents() != expected_m {
        return Err(Error::DimensionMismatch {
            what: "checkpoint afferents vs image geometry",
            expected: expected_m,
            actual: ckpt.weights.n_afferents(),
        });
    }
    cfg.neurons = ckpt.weights.n_neurons();
    cfg.theta = ckpt.theta;
    cfg.wta_k = cfg.wta_k.min(cfg.neurons);
    let mut net = cfg.network();
    net.stdp = ckpt.stdp;
    net.validate()?;

    let stimuli = encode_set(&retina, &test_set)?;
    let bank = readout::estimate_rf(
        &ckpt.weights,
        &retina.kernel,
        (test_set.rows, test_set.cols),
    )?;
    let report = readout::evaluate(&ckpt.weights, &bank, &stimuli, &net)?;

    prepare_out(&args.out, &cfg)?;
    dataio::write_csv::<ImageRecord>(&report.records, &args.out.join("eval_images.csv"))?;
    dataio::write_csv(
        &[EvalSummary {
            mean_error: report.mean_error,
            error_std: report.error_std,
            mean_spikes: report.mean_spikes,
        }],
        &args.out.join("eval_summary.csv"),
    )?;

    // original | LGN contrast | reconstruction, four images per montage row
    let mut tiles = Vec::new();
    for (im, s) in test_set.images.iter().zip(&stimuli).take(16) {
        let (_, or, _) = readout::evaluate_one(&ckpt.weights, &bank, s, &net)?;
        tiles.push(Grid::from_bytes(test_set.rows, test_set.cols, im)?);
        tiles.push(s.contrast.clone());
        tiles.push(or);
    }
    dataio::write_image_grid(&tiles, 12, &args.out.join("reconstructions.png"))?;
    eprintln!(
        "mean error {:.4} ± {:.4}, mean spikes {:.2} over {} images",
        report.mean_error,
        report.error_std,
        report.mean_spikes,
        report.records.len()
    );
    Ok(())
}

pub fn cmd_sweep(axis_text: &str, args: &CommonArgs) -> Result<()> {
    let axis = SweepAxis::parse(axis_text)?;
    let cfg = args.resolve()?;
    let base = cfg.plan();
    if let SweepAxis::Wta(ks) = &axis {
        if let Some(&k) = ks.iter().find(|&&k| k > cfg.neurons) {
            return Err(Error::Config(format!(
                "wta value {k} exceeds neurons = {}",
                cfg.neurons
            )));
        }
    }
    let retina = cfg.retina()?;
    let (train_set, test_set) = load_splits(&cfg)?;
    let train_enc = encode_set(&retina, &train_set)?;
    let test_enc = encode_set(&retina, &test_set)?;
    let rows = training::sweep(&base, &axis, &retina.kernel, &train_enc, &test_enc)?;

    prepare_out(&args.out, &cfg)?;
    let name = axis.name();
    dataio::write_csv(&rows, &args.out.join(format!("sweep_{name}.csv")))?;
    let train_pts: Vec<_> = rows
        .iter()
        .map(|r| (r.axis_value as f64, r.train_error))
        .collect();
    let test_pts: Vec<_> = rows
        .iter()
        .map(|r| (r.axis_value as f64, r.test_error))
        .collect();
    dataio::write_line_plot(
        &[
            Series {
                points: &train_pts,
                rgb: [30, 90, 200],
            },
            Series {
                points: &test_pts,
                rgb: [220, 120, 0],
            },
        ],
        &args.out.join(format!("sweep_{name}_error.png")),
    )?;
    let spike_pts: Vec<_> = rows
        .iter()
        .map(|r| (r.axis_value as f64, r.mean_test_spikes))
        .collect();
    dataio::write_line_plot(
        &[Series {
            points: &spike_pts,
            rgb: [200, 0, 0],
        }],
        &args.out.join(format!("sweep_{name}_spikes.png")),
    )?;
    for r in &rows {
        eprintln!(
            "{name}={}: train {:.4} test {:.4} spikes {:.2}",
            r.axis_value, r.train_error, r.test_error, r.mean_test_spikes
        );
    }
    Ok(())
}

pub fn cmd_export_rf(checkpoint: &Path, args: &CommonArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let retina = cfg.retina()?;
    let ckpt = dataio::load_checkpoint(checkpoint)?;
    prepare_out(&args.out, &cfg)?;
    write_rf_montage(
        &ckpt.weights,
        &retina,
        &args.out.join("receptive_fields.png"),
    )
}

pub fn cmd_encode(count: usize, args: &CommonArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let retina = cfg.retina()?;
    let set = dataio::load_image_set(train_path(&cfg)?)?;
    let mut tiles = Vec::new();
    for im in set.images.iter().take(count) {
        let g = Grid::from_bytes(set.rows, set.cols, im)?;
        let map = encode_lgn(&g, &retina.kernel)?;
        let contrast = map.contrast();
        tiles.extend([g, map.on, map.off, contrast]);
    }
    if tiles.is_empty() {
        return Err(Error::Empty("images to encode"));
    }
    prepare_out(&args.out, &cfg)?;
    dataio::write_image_grid(&tiles, 8, &args.out.join("lgn_maps.png"))
}
