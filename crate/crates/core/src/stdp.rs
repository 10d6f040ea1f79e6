//! Multiplicative STDP with an infinitely wide timing window.
//!
//! With the window fixed at 1 the update depends only on spike order:
//!
//! ```text
//! LTP (pre at or before post):  Δw =  α+ · (1 − w)^μ+
//! LTD (otherwise):              Δw = −α− · w^μ−
//! ```

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA_PLUS: f64 = 5e-3;
pub const DEFAULT_ALPHA_MINUS: f64 = 3.75e-3;
pub const DEFAULT_MU_PLUS: f64 = 0.65;
pub const DEFAULT_MU_MINUS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StdpParams {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
}

impl Default for StdpParams {
    fn default() -> Self {
        Self {
            alpha_plus: DEFAULT_ALPHA_PLUS,
            alpha_minus: DEFAULT_ALPHA_MINUS,
            mu_plus: DEFAULT_MU_PLUS,
            mu_minus: DEFAULT_MU_MINUS,
        }
    }
}

impl StdpParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha_plus", self.alpha_plus),
            ("alpha_minus", self.alpha_minus),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        for (name, v) in [("mu_plus", self.mu_plus), ("mu_minus", self.mu_minus)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Weight change for a synapse currently at `w`.
pub fn stdp_delta(w: f64, pre_before_post: bool, params: &StdpParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Domain(w));
    }
    let p = params;
    Ok(if pre_before_post {
        p.alpha_plus * (1.0 - w).powf(p.mu_plus)
    } else {
        -p.alpha_minus * w.powf(p.mu_minus)
    })
}

/// Single-precision update kernel used for bulk column updates: `w + Δw`,
/// clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WeightUpdate {
    alpha_plus: f32,
    alpha_minus: f32,
    mu_plus: f32,
    mu_minus: f32,
}

impl WeightUpdate {
    pub(crate) fn new(p: &StdpParams) -> Self {
        Self {
            alpha_plus: p.alpha_plus as f32,
            alpha_minus: p.alpha_minus as f32,
            mu_plus: p.mu_plus as f32,
            mu_minus: p.mu_minus as f32,
        }
    }

    #[inline]
    pub(crate) fn apply(&self, w: f32, pre_before_post: bool) -> f32 {
        let d = if pre_before_post {
            self.alpha_plus * (1.0 - w).powf(self.mu_plus)
        } else {
            -self.alpha_minus * w.powf(self.mu_minus)
        };
        (w + d).clamp(0.0, 1.0)
    }
}
