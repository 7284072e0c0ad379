//! 1-D two-mass spring-damper collision simulator with an optional
//! detect-and-react stage, used both to generate synthetic traces and as
//! the sampled counterpart of the closed-form peak-force model.
//!
//! The robot is a free mass approaching a human surface modelled as a
//! unilateral spring(-damper); the human side is either a free mass or a
//! rigid wall (constrained). Integration is fixed-step semi-implicit
//! Euler, which keeps the discrete contact energy bounded for stiff
//! undamped contact. After the contact force first exceeds the detection
//! threshold plus a reaction delay, the robot velocity is overridden with
//! the commanded reaction velocity (0 = stop and hold, > 0 = retract).

use thiserror::Error;

use crate::contact_model::HumanMass;
use crate::trace::{ForceTrace, TraceSource};

/// Default integration step `[s]`.
pub const DEFAULT_DT: f64 = 1e-5;

/// The step must resolve the contact oscillation: dt ≤ period / this.
pub const MIN_STEPS_PER_PERIOD: f64 = 50.0;

#[derive(Debug, Error, PartialEq)]
pub enum ImpactError {
    #[error("{name} must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative (got {value})")]
    Negative { name: &'static str, value: f64 },
    #[error("dt = {dt} too coarse; the contact oscillation needs dt <= {max}")]
    TimestepTooCoarse { dt: f64, max: f64 },
    #[error("duration must cover at least 10 steps")]
    DurationTooShort,
    #[error("the closed-form peak applies only to undamped runs without a reaction stage")]
    NotClosedForm,
}

/// Parameters of one simulated collision.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactConfig {
    pub robot_mass: f64,
    /// Approach velocity at first contact `[m/s]`.
    pub robot_velocity: f64,
    pub human_mass: HumanMass,
    pub stiffness: f64,
    /// Contact damping `[N·s/m]`.
    pub damping: f64,
    /// Contact force that triggers the reaction, if any `[N]`.
    pub detection_force: Option<f64>,
    /// Delay between detection and the commanded reaction `[s]`.
    pub reaction_delay: f64,
    /// Commanded robot speed away from the contact after the reaction
    /// kicks in `[m/s]`; 0 stops and holds.
    pub retraction_velocity: f64,
    pub duration: f64,
    pub dt: f64,
}

impl ImpactConfig {
    /// Undamped free impact with defaults for the optional stages; the
    /// duration covers the full contact bounce.
    pub fn undamped(robot_mass: f64, robot_velocity: f64, human_mass: HumanMass, stiffness: f64) -> Self {
        let mut cfg = Self {
            robot_mass,
            robot_velocity,
            human_mass,
            stiffness,
            damping: 0.0,
            detection_force: None,
            reaction_delay: 0.0,
            retraction_velocity: 0.0,
            duration: 1.0,
            dt: DEFAULT_DT,
        };
        cfg.duration = cfg.suggested_duration();
        cfg
    }

    /// Reduced (two-body effective) mass of the contact.
    pub fn effective_mass(&self) -> f64 {
        match self.human_mass {
            HumanMass::Infinite => self.robot_mass,
            HumanMass::Finite(mh) => 1.0 / (1.0 / self.robot_mass + 1.0 / mh),
        }
    }

    /// Natural period of the contact oscillation, 2π√(μ/k).
    pub fn contact_period(&self) -> f64 {
        std::f64::consts::TAU * (self.effective_mass() / self.stiffness).sqrt()
    }

    /// Long enough to cover the first full contact (half an oscillation)
    /// with margin.
    pub fn suggested_duration(&self) -> f64 {
        (self.contact_period() * 0.75).max(10.0 * self.dt)
    }

    pub fn validate(&self) -> Result<(), ImpactError> {
        for (name, v) in [
            ("robot_mass", self.robot_mass),
            ("stiffness", self.stiffness),
            ("dt", self.dt),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(ImpactError::NonPositive { name, value: v });
            }
        }
        if let HumanMass::Finite(mh) = self.human_mass {
            if !mh.is_finite() || mh <= 0.0 {
                return Err(ImpactError::NonPositive {
                    name: "human_mass",
                    value: mh,
                });
            }
        }
        for (name, v) in [
            ("robot_velocity", self.robot_velocity),
            ("damping", self.damping),
            ("reaction_delay", self.reaction_delay),
            ("retraction_velocity", self.retraction_velocity),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(ImpactError::Negative { name, value: v });
            }
        }
        if let Some(d) = self.detection_force {
            if !d.is_finite() || d < 0.0 {
                return Err(ImpactError::Negative {
                    name: "detection_force",
                    value: d,
                });
            }
        }
        let max_dt = self.contact_period() / MIN_STEPS_PER_PERIOD;
        if self.dt > max_dt {
            return Err(ImpactError::TimestepTooCoarse {
                dt: self.dt,
                max: max_dt,
            });
        }
        if self.duration < 10.0 * self.dt {
            return Err(ImpactError::DurationTooShort);
        }
        Ok(())
    }
}

/// Full state at one sample instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactSample {
    pub t: f64,
    pub robot_pos: f64,
    pub robot_vel: f64,
    pub human_pos: f64,
    pub human_vel: f64,
    pub force: f64,
}

/// Contact force for a penetration state: unilateral spring plus damping,
/// clamped so the total never pulls.
fn contact_force_1d(cfg: &ImpactConfig, penetration: f64, penetration_rate: f64) -> f64 {
    if penetration <= 0.0 {
        return 0.0;
    }
    (cfg.stiffness * penetration + cfg.damping * penetration_rate).max(0.0)
}

/// Integrate and return the state at every step, including t = 0.
pub fn simulate_states(cfg: &ImpactConfig) -> Result<Vec<ImpactSample>, ImpactError> {
    cfg.validate()?;

    let steps = (cfg.duration / cfg.dt).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);

    // Robot starts touching the surface with the commanded approach speed.
    let mut xr = 0.0f64;
    let mut vr = cfg.robot_velocity;
    let mut xh = 0.0f64;
    let mut vh = 0.0f64;
    let mut detected_at: Option<f64> = None;

    for i in 0..=steps {
        let t = i as f64 * cfg.dt;
        let force = contact_force_1d(cfg, xr - xh, vr - vh);
        out.push(ImpactSample {
            t,
            robot_pos: xr,
            robot_vel: vr,
            human_pos: xh,
            human_vel: vh,
            force,
        });
        if i == steps {
            break;
        }

        if detected_at.is_none() {
            if let Some(threshold) = cfg.detection_force {
                if force > threshold {
                    detected_at = Some(t);
                }
            }
        }
        let reacting = detected_at.is_some_and(|t0| t >= t0 + cfg.reaction_delay);

        // Semi-implicit Euler: velocities first, then positions.
        if reacting {
            vr = -cfg.retraction_velocity;
        } else {
            vr += -force / cfg.robot_mass * cfg.dt;
        }
        if let HumanMass::Finite(mh) = cfg.human_mass {
            vh += force / mh * cfg.dt;
        }
        xr += vr * cfg.dt;
        xh += vh * cfg.dt;
    }

    Ok(out)
}

/// Integrate and return the sampled contact force as a trace.
pub fn simulate(cfg: &ImpactConfig) -> Result<ForceTrace, ImpactError> {
    let states = simulate_states(cfg)?;
    let samples = states.iter().map(|s| (s.t, s.force)).collect();
    Ok(ForceTrace::new(samples, TraceSource::Simulated).expect("simulator emits valid traces"))
}

/// Closed-form peak force of the undamped free impact: v·√(μ_eff·k).
/// Only valid without damping and without a reaction stage.
pub fn peak_force_analytic(cfg: &ImpactConfig) -> Result<f64, ImpactError> {
    if cfg.damping != 0.0 || cfg.detection_force.is_some() {
        return Err(ImpactError::NotClosedForm);
    }
    cfg.validate()?;
    Ok(cfg.robot_velocity * (cfg.effective_mass() * cfg.stiffness).sqrt())
}
