//! Wall-clock cost estimation for experimental validation of contact
//! forces: per-configuration time and the total over contact positions
//! and body parts.

use thiserror::Error;

/// Time components of one experimental validation campaign, in hours.
#[derive(Debug, Clone, PartialEq)]
pub struct CostParams {
    /// Preparation per collision position and robot adjustment.
    pub setup_h: f64,
    /// One robot speed adjustment.
    pub adjust_h: f64,
    /// One repeat of the experiment.
    pub repeat_h: f64,
    /// Repeats per accepted setting.
    pub repeats: u32,
    /// Speed-adjustment trials to converge on a safe setting.
    pub trials: u32,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            setup_h: 0.5,
            adjust_h: 0.05,
            repeat_h: 0.02,
            repeats: 3,
            trials: 6,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("{name} must be finite and >= 0 (got {value})")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must be >= 1")]
    TooFew { name: &'static str },
}

impl CostParams {
    pub fn validate(&self) -> Result<(), CostError> {
        for (name, v) in [
            ("setup_h", self.setup_h),
            ("adjust_h", self.adjust_h),
            ("repeat_h", self.repeat_h),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(CostError::Negative { name, value: v });
            }
        }
        if self.repeats < 1 {
            return Err(CostError::TooFew { name: "repeats" });
        }
        if self.trials < 1 {
            return Err(CostError::TooFew { name: "trials" });
        }
        Ok(())
    }
}

/// Hours to validate one (position, body part) configuration:
/// setup + trials·adjust + repeats·repeat.
pub fn cost_per_configuration(p: &CostParams) -> f64 {
    p.setup_h + p.trials as f64 * p.adjust_h + p.repeats as f64 * p.repeat_h
}

/// Hours over a full campaign: positions × body parts configurations.
pub fn cost_total(p: &CostParams, positions: u32, body_parts: u32) -> f64 {
    positions as f64 * body_parts as f64 * cost_per_configuration(p)
}

/// Campaign total from an externally supplied per-configuration time.
pub fn cost_total_from_per_config(per_config_h: f64, positions: u32, body_parts: u32) -> f64 {
    positions as f64 * body_parts as f64 * per_config_h
}
