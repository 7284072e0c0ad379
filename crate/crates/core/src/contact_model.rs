//! Closed-form contact-force model, the two-body effective mass, the
//! simplified robot mass, and body-part parameter data.
//!
//! All computation is strict SI (N, m, kg, N/m). Data files state
//! stiffness in N/mm, matching common practice for human body-part
//! tables; the conversion happens once at the file boundary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ContactModelError {
    #[error("{name} must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative (got {value})")]
    Negative { name: &'static str, value: f64 },
    #[error("body part data error at `{path}`: {message}")]
    PartData { path: String, message: String },
    #[error("body part file syntax error at line {line}, column {column}: {message}")]
    PartSyntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown body part `{0}`")]
    UnknownPart(String),
}

/// Human body-part mass in the two-body reduction. `Infinite` models a
/// fully constrained body part; it is an explicit variant, never a
/// sentinel float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HumanMass {
    Finite(f64),
    Infinite,
}

impl std::fmt::Display for HumanMass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HumanMass::Finite(m) => write!(f, "{m}"),
            HumanMass::Infinite => write!(f, "inf"),
        }
    }
}

/// Per-body-part contact parameters. SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyPartParams {
    pub name: String,
    /// Effective mass of the body part `[kg]`.
    pub effective_mass: f64,
    /// Contact stiffness `[N/m]`.
    pub stiffness: f64,
    /// Peak-force limit for the dynamic phase `[N]`.
    pub transient_force_limit: f64,
    /// Sustained-force limit for the quasi-static phase `[N]`.
    pub quasistatic_force_limit: f64,
    /// Contact damping used by the simulator `[N·s/m]`; 0 unless a data
    /// file provides one.
    pub damping: f64,
}

impl BodyPartParams {
    fn validate(&self, path: &str) -> Result<(), ContactModelError> {
        let fields = [
            ("effective_mass_kg", self.effective_mass),
            ("stiffness", self.stiffness),
            ("transient_force_limit_n", self.transient_force_limit),
            ("quasistatic_force_limit_n", self.quasistatic_force_limit),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v <= 0.0 {
                return Err(ContactModelError::PartData {
                    path: format!("{path}.{name}"),
                    message: "must be finite and > 0".into(),
                });
            }
        }
        if !self.damping.is_finite() || self.damping < 0.0 {
            return Err(ContactModelError::PartData {
                path: format!("{path}.damping_ns_per_m"),
                message: "must be finite and >= 0".into(),
            });
        }
        if self.transient_force_limit < self.quasistatic_force_limit {
            return Err(ContactModelError::PartData {
                path: format!("{path}.transient_force_limit_n"),
                message: "transient limit must be >= quasi-static limit".into(),
            });
        }
        Ok(())
    }
}

/// Simplified robot mass: half the total moving mass plus the load.
pub fn iso_robot_mass(total_moving_mass: f64, load_mass: f64) -> Result<f64, ContactModelError> {
    if !total_moving_mass.is_finite() || total_moving_mass <= 0.0 {
        return Err(ContactModelError::NonPositive {
            name: "total moving mass",
            value: total_moving_mass,
        });
    }
    if load_mass < 0.0 {
        return Err(ContactModelError::Negative {
            name: "load mass",
            value: load_mass,
        });
    }
    Ok(total_moving_mass / 2.0 + load_mass)
}

/// Two-body effective mass μ = (1/m_r + 1/m_h)⁻¹; equals m_r when the
/// human side is constrained (infinite).
pub fn effective_mass(robot_mass: f64, human_mass: HumanMass) -> Result<f64, ContactModelError> {
    if !robot_mass.is_finite() || robot_mass <= 0.0 {
        return Err(ContactModelError::NonPositive {
            name: "robot mass",
            value: robot_mass,
        });
    }
    match human_mass {
        HumanMass::Infinite => Ok(robot_mass),
        HumanMass::Finite(mh) => {
            if !mh.is_finite() || mh <= 0.0 {
                return Err(ContactModelError::NonPositive {
                    name: "human mass",
                    value: mh,
                });
            }
            Ok(1.0 / (1.0 / robot_mass + 1.0 / mh))
        }
    }
}

/// Peak contact force of the undamped impact model: F = v_rel · √(μ k).
pub fn contact_force(v_rel: f64, mu: f64, stiffness: f64) -> Result<f64, ContactModelError> {
    for (name, v) in [("v_rel", v_rel), ("mu", mu), ("stiffness", stiffness)] {
        if !v.is_finite() || v < 0.0 {
            return Err(ContactModelError::Negative { name, value: v });
        }
    }
    Ok(v_rel * (mu * stiffness).sqrt())
}

/// Largest relative velocity keeping the peak force at or below `f_max`:
/// v = F_max / √(μ k). Exact inverse of [`contact_force`].
pub fn velocity_limit(f_max: f64, mu: f64, stiffness: f64) -> Result<f64, ContactModelError> {
    for (name, v) in [("f_max", f_max), ("mu", mu), ("stiffness", stiffness)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(ContactModelError::NonPositive { name, value: v });
        }
    }
    Ok(f_max / (mu * stiffness).sqrt())
}

/// Agreement bands between a measured force and the expected reference.
/// `Over*` means the reference overestimates (measured lower), `Under*`
/// that it underestimates; the split points are 10 N and 100 N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForceDeviation {
    #[serde(rename = "correct")]
    Correct,
    #[serde(rename = "over_10")]
    Over10,
    #[serde(rename = "over_100")]
    Over100,
    #[serde(rename = "under_10")]
    Under10,
    #[serde(rename = "under_100")]
    Under100,
}

impl std::fmt::Display for ForceDeviation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ForceDeviation::Correct => "correct",
            ForceDeviation::Over10 => "over_10",
            ForceDeviation::Over100 => "over_100",
            ForceDeviation::Under10 => "under_10",
            ForceDeviation::Under100 => "under_100",
        };
        f.write_str(s)
    }
}

/// Classify |measured − expected| into the ±10 N / ±100 N bands.
pub fn classify_force_deviation(measured: f64, expected: f64) -> ForceDeviation {
    let diff = expected - measured;
    if diff.abs() <= 10.0 {
        ForceDeviation::Correct
    } else if diff > 0.0 {
        if diff <= 100.0 {
            ForceDeviation::Over10
        } else {
            ForceDeviation::Over100
        }
    } else if -diff <= 100.0 {
        ForceDeviation::Under10
    } else {
        ForceDeviation::Under100
    }
}

/// How the robot-side and human-side masses of the two-body reduction are
/// chosen by an assessment interpretation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobotMassMode {
    /// M/2 + m_L from [`iso_robot_mass`].
    IsoSimplified,
    /// Configuration-dependent reflected mass from the dynamics model.
    Reflected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HumanMassMode {
    /// Body-part effective mass from the data table.
    TsValue,
    /// Constrained body part: infinite mass.
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectiveMassSpec {
    pub robot_mass_mode: RobotMassMode,
    pub human_mass_mode: HumanMassMode,
}

/// Built-in body-part data: hand (0.6 kg, 75 N/mm, 280 N transient) and
/// back (40 kg, 35 N/mm, 420 N transient). Quasi-static limits default to
/// half the transient values; data files may override.
pub fn builtin_body_parts() -> Vec<BodyPartParams> {
    vec![
        BodyPartParams {
            name: "hand".into(),
            effective_mass: 0.6,
            stiffness: 75_000.0,
            transient_force_limit: 280.0,
            quasistatic_force_limit: 140.0,
            damping: 0.0,
        },
        BodyPartParams {
            name: "back".into(),
            effective_mass: 40.0,
            stiffness: 35_000.0,
            transient_force_limit: 420.0,
            quasistatic_force_limit: 210.0,
            damping: 0.0,
        },
    ]
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyPartDoc {
    name: String,
    effective_mass_kg: f64,
    stiffness_n_per_mm: f64,
    transient_force_limit_n: f64,
    quasistatic_force_limit_n: f64,
    #[serde(default)]
    damping_ns_per_m: f64,
}

/// Parse a body-part data file: a JSON array with explicit unit suffixes
/// in key names; stiffness is given in N/mm.
pub fn parse_body_parts(text: &str) -> Result<Vec<BodyPartParams>, ContactModelError> {
    let docs: Vec<BodyPartDoc> = serde_json::from_str(text).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            ContactModelError::PartSyntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        } else {
            ContactModelError::PartData {
                path: "document".into(),
                message: e.to_string(),
            }
        }
    })?;
    let mut parts = Vec::with_capacity(docs.len());
    for (i, d) in docs.into_iter().enumerate() {
        let part = BodyPartParams {
            name: d.name,
            effective_mass: d.effective_mass_kg,
            stiffness: d.stiffness_n_per_mm * 1000.0,
            transient_force_limit: d.transient_force_limit_n,
            quasistatic_force_limit: d.quasistatic_force_limit_n,
            damping: d.damping_ns_per_m,
        };
        part.validate(&format!("[{i}]"))?;
        parts.push(part);
    }
    Ok(parts)
}

/// Lookup table of body-part parameters, keyed by name.
#[derive(Debug, Clone)]
pub struct BodyPartTable {
    parts: BTreeMap<String, BodyPartParams>,
}

impl BodyPartTable {
    /// Table with just the built-in parts.
    pub fn builtin() -> Self {
        let mut parts = BTreeMap::new();
        for p in builtin_body_parts() {
            parts.insert(p.name.clone(), p);
        }
        Self { parts }
    }

    /// Add or replace parts (later entries win).
    pub fn extend(&mut self, extra: Vec<BodyPartParams>) {
        for p in extra {
            self.parts.insert(p.name.clone(), p);
        }
    }

    pub fn get(&self, name: &str) -> Result<&BodyPartParams, ContactModelError> {
        self.parts
            .get(name)
            .ok_or_else(|| ContactModelError::UnknownPart(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.parts.keys().map(String::as_str)
    }
}

impl Default for BodyPartTable {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn iso_mass_examples() {
        assert_relative_eq!(iso_robot_mass(10.0, 0.0).unwrap(), 5.0);
        assert_relative_eq!(iso_robot_mass(21.5, 0.6).unwrap(), 11.35, epsilon = 1e-12);
        assert_relative_eq!(iso_robot_mass(21.74, 0.0).unwrap(), 10.87, epsilon = 1e-12);
        assert!(iso_robot_mass(0.0, 0.0).is_err());
    }

    #[test]
    fn effective_mass_examples() {
        let mu = effective_mass(10.87, HumanMass::Finite(0.6)).unwrap();
        assert!((mu - 0.5686).abs() < 5e-4);
        assert_eq!(format!("{mu:.2}"), "0.57");

        let mu = effective_mass(5.54, HumanMass::Finite(0.6)).unwrap();
        assert!((mu - 0.5413).abs() < 5e-4);
        assert_eq!(format!("{mu:.2}"), "0.54");

        assert_relative_eq!(effective_mass(7.3, HumanMass::Infinite).unwrap(), 7.3);
        assert!(effective_mass(-1.0, HumanMass::Infinite).is_err());
        assert!(effective_mass(1.0, HumanMass::Finite(0.0)).is_err());
    }

    #[test]
    fn contact_force_examples() {
        assert_relative_eq!(contact_force(0.0, 3.0, 1e5).unwrap(), 0.0);
        let f = contact_force(1.0, 0.5686, 75_000.0).unwrap();
        assert_relative_eq!(f, (0.5686f64 * 75_000.0).sqrt(), epsilon = 1e-12);
        assert!((f - 206.5).abs() < 0.05);
        let f = contact_force(0.28, 10.87, 75_000.0).unwrap();
        assert!((f - 252.8).abs() < 0.05);
        assert!(contact_force(-0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn velocity_limit_examples() {
        let v = velocity_limit(280.0, 0.5686, 75_000.0).unwrap();
        assert!((v - 1.356).abs() < 1e-3);
        let v = velocity_limit(280.0, 10.87, 75_000.0).unwrap();
        assert!((v - 0.310).abs() < 1e-3);
        let v = velocity_limit(420.0, 4.867, 35_000.0).unwrap();
        assert!((v - 1.018).abs() < 1e-3);
        assert!(velocity_limit(280.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn builtin_parts_hold_the_reference_values() {
        let table = BodyPartTable::builtin();
        let hand = table.get("hand").unwrap();
        assert_eq!(hand.transient_force_limit, 280.0);
        assert_eq!(hand.quasistatic_force_limit, 140.0);
        assert_eq!(hand.stiffness, 75_000.0);
        assert_eq!(hand.effective_mass, 0.6);
        let back = table.get("back").unwrap();
        assert_eq!(back.stiffness, 35_000.0);
        assert_eq!(back.transient_force_limit, 420.0);
        assert!(table.get("elbow").is_err());
    }

    #[test]
    fn data_file_extends_table() {
        let text = r#"[
            {"name": "elbow", "effective_mass_kg": 2.0, "stiffness_n_per_mm": 50.0,
             "transient_force_limit_n": 300.0, "quasistatic_force_limit_n": 150.0}
        ]"#;
        let mut table = BodyPartTable::builtin();
        table.extend(parse_body_parts(text).unwrap());
        let elbow = table.get("elbow").unwrap();
        assert_eq!(elbow.stiffness, 50_000.0);
        assert_eq!(elbow.damping, 0.0);
    }

    #[test]
    fn bad_part_data_rejected() {
        let text = r#"[
            {"name": "x", "effective_mass_kg": 2.0, "stiffness_n_per_mm": 50.0,
             "transient_force_limit_n": 100.0, "quasistatic_force_limit_n": 150.0}
        ]"#;
        assert!(matches!(
            parse_body_parts(text),
            Err(ContactModelError::PartData { .. })
        ));
    }

    #[test]
    fn deviation_bands() {
        use ForceDeviation::*;
        assert_eq!(classify_force_deviation(289.0, 280.0), Correct);
        assert_eq!(classify_force_deviation(196.0, 420.0), Over100);
        assert_eq!(classify_force_deviation(427.0, 280.0), Under100);
        assert_eq!(classify_force_deviation(230.0, 280.0), Over10);
        assert_eq!(classify_force_deviation(292.0, 280.0), Under10);
        // Band edges are inclusive.
        assert_eq!(classify_force_deviation(270.0, 280.0), Correct);
        assert_eq!(classify_force_deviation(180.0, 280.0), Over10);
        assert_eq!(classify_force_deviation(380.0, 280.0), Under10);
    }

    proptest! {
        #[test]
        fn effective_mass_symmetric_and_below_min(a in 0.1f64..100.0, b in 0.1f64..100.0) {
            let ab = effective_mass(a, HumanMass::Finite(b)).unwrap();
            let ba = effective_mass(b, HumanMass::Finite(a)).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs());
            prop_assert!(ab <= a.min(b) + 1e-12);
        }

        #[test]
        fn effective_mass_monotone(a in 0.1f64..50.0, b in 0.1f64..50.0, da in 0.01f64..10.0) {
            let base = effective_mass(a, HumanMass::Finite(b)).unwrap();
            let bigger = effective_mass(a + da, HumanMass::Finite(b)).unwrap();
            prop_assert!(bigger >= base);
        }

        #[test]
        fn force_homogeneous_in_velocity(v in 0.0f64..2.0, s in 0.1f64..5.0,
                                         mu in 0.1f64..20.0, k in 1e3f64..2e5) {
            let f1 = contact_force(v, mu, k).unwrap();
            let fs = contact_force(s * v, mu, k).unwrap();
            prop_assert!((fs - s * f1).abs() <= 1e-9 * fs.abs().max(1.0));
        }

        #[test]
        fn force_limit_round_trip(f in 1.0f64..1000.0, mu in 0.1f64..20.0, k in 1e3f64..2e5) {
            let v = velocity_limit(f, mu, k).unwrap();
            let back = contact_force(v, mu, k).unwrap();
            prop_assert!((back - f).abs() <= 1e-9 * f);
        }

        #[test]
        fn infinite_human_dominates_ts_value(v in 0.01f64..2.0, mr in 0.5f64..20.0,
                                             mh in 0.1f64..50.0, k in 1e3f64..2e5) {
            // Constrained (infinite) human mass never predicts less force.
            let f_a = contact_force(v, effective_mass(mr, HumanMass::Finite(mh)).unwrap(), k).unwrap();
            let f_b1 = contact_force(v, effective_mass(mr, HumanMass::Infinite).unwrap(), k).unwrap();
            prop_assert!(f_b1 >= f_a);
        }

        #[test]
        fn self_deviation_is_correct(x in 0.0f64..2000.0) {
            prop_assert_eq!(classify_force_deviation(x, x), ForceDeviation::Correct);
        }
    }
}
