//! Flat `key = value` run configuration (TOML syntax). Unknown keys are
//! rejected; missing keys take their defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{NetworkConfig, DEFAULT_NEURONS, DEFAULT_THETA};
use crate::retina::{
    DogKernel, Retina, DEFAULT_ACTIVITY_FLOOR, DEFAULT_KERNEL_SIZE, DEFAULT_SIGMA_CENTER,
    DEFAULT_SIGMA_SURROUND,
};
use crate::stdp::{
    StdpParams, DEFAULT_ALPHA_MINUS, DEFAULT_ALPHA_PLUS, DEFAULT_MU_MINUS, DEFAULT_MU_PLUS,
};
use crate::training::{TrainPlan, DEFAULT_CONVERGENCE_TOL, DEFAULT_EPOCHS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    // retina
    pub sigma_center: f64,
    pub sigma_surround: f64,
    pub kernel_size: usize,
    pub activity_floor: f64,
    // network
    pub neurons: usize,
    pub theta: f64,
    pub wta_k: usize,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    // training
    pub seed: u64,
    pub epochs: usize,
    pub shuffle_each_epoch: bool,
    pub convergence_tol: f64,
    // data
    pub n_train: usize,
    pub n_test: usize,
    pub split_seed: u64,
    pub train_images: Option<PathBuf>,
    pub test_images: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sigma_center: DEFAULT_SIGMA_CENTER,
            sigma_surround: DEFAULT_SIGMA_SURROUND,
            kernel_size: DEFAULT_KERNEL_SIZE,
            activity_floor: DEFAULT_ACTIVITY_FLOOR,
            neurons: DEFAULT_NEURONS,
            theta: DEFAULT_THETA,
            wta_k: 1,
            alpha_plus: DEFAULT_ALPHA_PLUS,
            alpha_minus: DEFAULT_ALPHA_MINUS,
            mu_plus: DEFAULT_MU_PLUS,
            mu_minus: DEFAULT_MU_MINUS,
            seed: 42,
            epochs: DEFAULT_EPOCHS,
            shuffle_each_epoch: true,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            n_train: 1000,
            n_test: 200,
            split_seed: 2024,
            train_images: None,
            test_images: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config fields are all serializable")
    }

    pub fn retina(&self) -> Result<Retina> {
        let kernel = DogKernel::new(self.sigma_center, self.sigma_surround, self.kernel_size)?;
        if !(self.activity_floor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "activity_floor must be positive, got {}",
                self.activity_floor
            )));
        }
        Ok(Retina {
            kernel,
            activity_floor: self.activity_floor,
        })
    }

    pub fn stdp(&self) -> StdpParams {
        StdpParams {
            alpha_plus: self.alpha_plus,
            alpha_minus: self.alpha_minus,
            mu_plus: self.mu_plus,
            mu_minus: self.mu_minus,
        }
    }

    pub fn network(&self) -> NetworkConfig {
        NetworkConfig {
            n_neurons: self.neurons,
            theta: self.theta,
            wta_k: self.wta_k,
            stdp: self.stdp(),
            seed: self.seed,
        }
    }

    /// Shuffle order uses a stream distinct from weight initialization.
    pub fn plan(&self) -> TrainPlan {
        TrainPlan {
            epochs: self.epochs,
            shuffle_each_epoch: self.shuffle_each_epoch,
            convergence_tol: self.convergence_tol,
            rng_seed: self.seed.wrapping_add(0x5eed),
            network: self.network(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.retina()?;
        self.plan().validate()?;
        if self.n_train == 0 {
            return Err(Error::InvalidParameter("n_train must be positive".into()));
        }
        Ok(())
    }
}
