//! Contact-scenario taxonomy, the consistency classification of the
//! transient / quasi-static labels, the five assessment interpretations,
//! and the decision tree that produces assessment reports.
//!
//! The two label systems in play are deliberately kept apart: the contact
//! *event type* (constrained vs. unconstrained — can the body part
//! recoil?) and the contact *force phase* (phase I dynamic peak vs.
//! phase II sustained force). Two of the four combinations carry
//! conflicting transient/quasi-static labels; [`classify_scenario`] makes
//! that explicit, and conflicts never auto-resolve — the caller picks an
//! [`Interpretation`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact_model::{
    contact_force, effective_mass, iso_robot_mass, velocity_limit, BodyPartTable,
    ContactModelError, EffectiveMassSpec, HumanMass, HumanMassMode, RobotMassMode,
};
use crate::dynamics::{reflected_mass, ContactFrame, DynamicsError};
use crate::numfmt::{round_sig6, sig6};
use crate::robot_model::{JointConfiguration, RobotModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventType {
    Constrained,
    Unconstrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForcePhase {
    #[serde(rename = "phase_I_dynamic")]
    PhaseI,
    #[serde(rename = "phase_II_quasistatic")]
    PhaseII,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Blunt,
    Sharp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Configuration {
    #[default]
    NonSingular,
    NearSingular,
    /// Resolve from the dynamics model: near-singular iff the reflected
    /// mass at the contact is unbounded.
    AutoFromDynamics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjuryMeasure {
    #[default]
    ForcePressure,
    EnergyDensity,
    CompressionCriterion,
    AoClassification,
}

/// Transient / quasi-static labels attached to a scenario, plus an
/// explicit conflict marker when both apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TsLabel {
    Transient,
    Quasistatic,
    Conflicting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Consistency {
    Consistent,
    Conflicting,
}

/// Label a (event type, force phase) combination and flag the two
/// combinations whose labels conflict.
pub fn classify_scenario(
    event_type: EventType,
    force_phase: ForcePhase,
) -> (BTreeSet<TsLabel>, Consistency) {
    use Consistency::*;
    let mut labels = BTreeSet::new();
    let consistency = match (event_type, force_phase) {
        (EventType::Unconstrained, ForcePhase::PhaseI) => {
            labels.insert(TsLabel::Transient);
            Consistent
        }
        (EventType::Constrained, ForcePhase::PhaseII) => {
            labels.insert(TsLabel::Quasistatic);
            Consistent
        }
        (EventType::Constrained, ForcePhase::PhaseI)
        | (EventType::Unconstrained, ForcePhase::PhaseII) => {
            labels.insert(TsLabel::Transient);
            labels.insert(TsLabel::Quasistatic);
            labels.insert(TsLabel::Conflicting);
            Conflicting
        }
    };
    (labels, consistency)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InterpretationId {
    A,
    B1,
    B2,
    C,
    D,
}

impl std::fmt::Display for InterpretationId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            InterpretationId::A => "A",
            InterpretationId::B1 => "B1",
            InterpretationId::B2 => "B2",
            InterpretationId::C => "C",
            InterpretationId::D => "D",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for InterpretationId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Self::A),
            "B1" => Ok(Self::B1),
            "B2" => Ok(Self::B2),
            "C" => Ok(Self::C),
            "D" => Ok(Self::D),
            other => Err(format!("unknown interpretation `{other}` (use A, B1, B2, C, D)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimation {
    Model,
    Experimental,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    Transient,
    Quasistatic,
}

/// One resolved way of assessing a scenario: how the effective mass is
/// built (if a model applies), whether estimation is model-based or
/// experimental, and which force threshold applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interpretation {
    pub id: InterpretationId,
    /// `None` for the purely experimental interpretations.
    pub mass_spec: Option<EffectiveMassSpec>,
    pub estimation: Estimation,
    pub threshold_kind: ThresholdKind,
}

impl Interpretation {
    pub fn for_id(id: InterpretationId) -> Self {
        let spec = |robot_mass_mode, human_mass_mode| {
            Some(EffectiveMassSpec {
                robot_mass_mode,
                human_mass_mode,
            })
        };
        match id {
            InterpretationId::A => Interpretation {
                id,
                mass_spec: spec(RobotMassMode::IsoSimplified, HumanMassMode::TsValue),
                estimation: Estimation::Model,
                threshold_kind: ThresholdKind::Transient,
            },
            InterpretationId::B1 => Interpretation {
                id,
                mass_spec: spec(RobotMassMode::IsoSimplified, HumanMassMode::Infinite),
                estimation: Estimation::Model,
                threshold_kind: ThresholdKind::Transient,
            },
            InterpretationId::B2 => Interpretation {
                id,
                mass_spec: spec(RobotMassMode::Reflected, HumanMassMode::Infinite),
                estimation: Estimation::Model,
                threshold_kind: ThresholdKind::Transient,
            },
            InterpretationId::C => Interpretation {
                id,
                mass_spec: None,
                estimation: Estimation::Experimental,
                threshold_kind: ThresholdKind::Quasistatic,
            },
            InterpretationId::D => Interpretation {
                id,
                mass_spec: None,
                estimation: Estimation::Experimental,
                threshold_kind: ThresholdKind::Transient,
            },
        }
    }
}

/// All five interpretations, in order A, B1, B2, C, D.
pub fn interpretation_catalog() -> Vec<Interpretation> {
    [
        InterpretationId::A,
        InterpretationId::B1,
        InterpretationId::B2,
        InterpretationId::C,
        InterpretationId::D,
    ]
    .into_iter()
    .map(Interpretation::for_id)
    .collect()
}

/// A contact scenario to assess.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactScenario {
    pub event_type: EventType,
    pub force_phase: ForcePhase,
    pub geometry: Geometry,
    pub configuration: Configuration,
    pub injury_measure: InjuryMeasure,
    pub body_part: String,
    /// Required for reflected-mass interpretations and auto configuration.
    pub contact: Option<ContactFrame>,
    pub joint_configuration: Option<JointConfiguration>,
    /// Relative velocity at contact `[m/s]`; required for model-based
    /// interpretations.
    pub velocity: Option<f64>,
    /// Workspace position label (e.g. "C", "N"), informational.
    pub position_label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Safe,
    RiskReductionRequired,
    ExperimentalValidationRequired,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Safe => "safe",
            Verdict::RiskReductionRequired => "risk_reduction_required",
            Verdict::ExperimentalValidationRequired => "experimental_validation_required",
        };
        f.write_str(s)
    }
}

/// Outcome of one decision-tree walk.
#[derive(Debug, Clone, PartialEq)]
pub struct AssessmentReport {
    pub scenario: ContactScenario,
    pub interpretation: InterpretationId,
    pub ts_labels: BTreeSet<TsLabel>,
    pub consistency: Consistency,
    /// Visited nodes, `node=branch`, ending in `verdict=…`.
    pub decision_path: Vec<String>,
    /// Model prediction `[N]`; `None` when estimation is experimental.
    pub predicted_force: Option<f64>,
    /// Effective mass used by the model `[kg]`, when one applies.
    pub effective_mass: Option<f64>,
    pub threshold_applied: f64,
    pub verdict: Verdict,
    pub recommended_action: String,
}

#[derive(Debug, Error)]
pub enum AssessError {
    #[error("injury measure `{0:?}` has no supported threshold here; use force_pressure")]
    UnsupportedInjuryMeasure(InjuryMeasure),
    #[error("velocity is required for model-based interpretation {0}")]
    MissingVelocity(InterpretationId),
    #[error("{0} requires a contact frame and a joint configuration")]
    MissingDynamicsData(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    ContactModel(#[from] ContactModelError),
    #[error("scenario file error: {0}")]
    ScenarioFile(String),
}

/// Walk the assessment tree for one scenario under one interpretation.
///
/// Order of checks: event type, force phase, configuration (only on the
/// constrained / phase II branch), geometry, injury measure, estimation,
/// threshold comparison. Sharp geometry and a near-singular clamping
/// configuration end the walk with a required risk reduction regardless
/// of everything else.
pub fn assess(
    model: &RobotModel,
    scenario: &ContactScenario,
    interp: &Interpretation,
    parts: &BodyPartTable,
) -> Result<AssessmentReport, AssessError> {
    let part = parts.get(&scenario.body_part)?;
    let (ts_labels, consistency) = classify_scenario(scenario.event_type, scenario.force_phase);

    let threshold_applied = match interp.threshold_kind {
        ThresholdKind::Transient => part.transient_force_limit,
        ThresholdKind::Quasistatic => part.quasistatic_force_limit,
    };

    // Model-based interpretations always yield a prediction, so resolve
    // the effective mass and velocity up front.
    let (mu, predicted_force) = match &interp.mass_spec {
        Some(spec) => {
            let velocity = scenario
                .velocity
                .ok_or(AssessError::MissingVelocity(interp.id))?;
            let mu = resolve_effective_mass(model, scenario, spec, part.effective_mass, interp.id)?;
            let force = contact_force(velocity, mu, part.stiffness)?;
            (Some(mu), Some(force))
        }
        None => (None, None),
    };

    let mut path = Vec::new();
    let event = match scenario.event_type {
        EventType::Constrained => "constrained",
        EventType::Unconstrained => "unconstrained",
    };
    path.push(format!("event_type={event}"));
    let phase = match scenario.force_phase {
        ForcePhase::PhaseI => "phase_I",
        ForcePhase::PhaseII => "phase_II",
    };
    path.push(format!("force_phase={phase}"));

    let done = |mut path: Vec<String>, verdict: Verdict, action: String| {
        path.push(format!("verdict={verdict}"));
        Ok(AssessmentReport {
            scenario: scenario.clone(),
            interpretation: interp.id,
            ts_labels: ts_labels.clone(),
            consistency,
            decision_path: path,
            predicted_force,
            effective_mass: mu,
            threshold_applied,
            verdict,
            recommended_action: action,
        })
    };

    // Clamping branch: the configuration decides whether the contact can
    // wedge without escape.
    if scenario.event_type == EventType::Constrained && scenario.force_phase == ForcePhase::PhaseII
    {
        let near_singular = resolve_near_singular(model, scenario)?;
        if near_singular {
            path.push("configuration=near_singular".into());
            return done(
                path,
                Verdict::RiskReductionRequired,
                "avoid near-singular configurations at the contact location".into(),
            );
        }
        path.push("configuration=non_singular".into());
    }

    match scenario.geometry {
        Geometry::Sharp => {
            path.push("geometry=sharp".into());
            return done(
                path,
                Verdict::RiskReductionRequired,
                "eliminate sharp contact geometry (redesign the end effector or add padding)"
                    .into(),
            );
        }
        Geometry::Blunt => path.push("geometry=blunt".into()),
    }

    if scenario.injury_measure != InjuryMeasure::ForcePressure {
        return Err(AssessError::UnsupportedInjuryMeasure(scenario.injury_measure));
    }
    path.push("injury_measure=force_pressure".into());

    match interp.estimation {
        Estimation::Experimental => {
            path.push("estimation=experimental".into());
            let kind = match interp.threshold_kind {
                ThresholdKind::Transient => "transient",
                ThresholdKind::Quasistatic => "quasi-static",
            };
            done(
                path,
                Verdict::ExperimentalValidationRequired,
                format!(
                    "measure the contact force and validate against the {kind} threshold {} N",
                    sig6(threshold_applied)
                ),
            )
        }
        Estimation::Model => {
            path.push("estimation=model".into());
            let force = predicted_force.expect("model interpretations carry a prediction");
            if force <= threshold_applied {
                path.push("force_vs_threshold=pass".into());
                done(
                    path,
                    Verdict::Safe,
                    "none; keep the relative velocity at or below the assessed value".into(),
                )
            } else {
                path.push("force_vs_threshold=exceeded".into());
                let v_max = velocity_limit(
                    threshold_applied,
                    mu.expect("model interpretations carry a mass"),
                    part.stiffness,
                )?;
                done(
                    path,
                    Verdict::RiskReductionRequired,
                    format!("reduce the relative velocity to <= {} m/s", sig6(v_max)),
                )
            }
        }
    }
}

fn resolve_effective_mass(
    model: &RobotModel,
    scenario: &ContactScenario,
    spec: &EffectiveMassSpec,
    part_mass: f64,
    id: InterpretationId,
) -> Result<f64, AssessError> {
    let robot_mass = match spec.robot_mass_mode {
        RobotMassMode::IsoSimplified => {
            iso_robot_mass(model.total_moving_mass(), model.load_mass())?
        }
        RobotMassMode::Reflected => {
            let (contact, q) = dynamics_inputs(scenario, format!("interpretation {id}"))?;
            reflected_mass(model, q, contact)?.capped()
        }
    };
    let human = match spec.human_mass_mode {
        HumanMassMode::TsValue => HumanMass::Finite(part_mass),
        HumanMassMode::Infinite => HumanMass::Infinite,
    };
    Ok(effective_mass(robot_mass, human)?)
}

fn resolve_near_singular(
    model: &RobotModel,
    scenario: &ContactScenario,
) -> Result<bool, AssessError> {
    match scenario.configuration {
        Configuration::NonSingular => Ok(false),
        Configuration::NearSingular => Ok(true),
        Configuration::AutoFromDynamics => {
            let (contact, q) =
                dynamics_inputs(scenario, "configuration auto_from_dynamics".to_string())?;
            Ok(reflected_mass(model, q, contact)?.is_unbounded())
        }
    }
}

fn dynamics_inputs(
    scenario: &ContactScenario,
    whom: String,
) -> Result<(&ContactFrame, &JointConfiguration), AssessError> {
    match (&scenario.contact, &scenario.joint_configuration) {
        (Some(c), Some(q)) => Ok((c, q)),
        _ => Err(AssessError::MissingDynamicsData(whom)),
    }
}

// ------------------------------------------------------------------
// Scenario files and report rendering.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    /// Path of the robot description, resolved relative to the CWD.
    pub robot: Option<String>,
    pub interpretation: String,
    pub event_type: EventType,
    pub force_phase: ForcePhase,
    pub geometry: Geometry,
    #[serde(default)]
    pub configuration: Configuration,
    #[serde(default)]
    pub injury_measure: InjuryMeasure,
    pub body_part: String,
    #[serde(default)]
    pub velocity_m_per_s: Option<f64>,
    #[serde(default)]
    pub position_label: Option<String>,
    #[serde(default)]
    pub contact: Option<ContactDoc>,
    #[serde(default)]
    pub joint_configuration: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactDoc {
    pub point_m: [f64; 3],
    pub direction: [f64; 3],
    pub attached_link: String,
}

impl ScenarioDoc {
    pub fn parse(text: &str) -> Result<Self, AssessError> {
        serde_json::from_str(text).map_err(|e| AssessError::ScenarioFile(e.to_string()))
    }

    pub fn to_scenario(&self) -> Result<(ContactScenario, InterpretationId), AssessError> {
        let id: InterpretationId = self
            .interpretation
            .parse()
            .map_err(AssessError::ScenarioFile)?;
        let contact = match &self.contact {
            Some(c) => Some(
                ContactFrame::new(
                    nalgebra::Point3::new(c.point_m[0], c.point_m[1], c.point_m[2]),
                    nalgebra::Vector3::new(c.direction[0], c.direction[1], c.direction[2]),
                    c.attached_link.clone(),
                )
                .map_err(AssessError::Dynamics)?,
            ),
            None => None,
        };
        if let Some(v) = self.velocity_m_per_s {
            if !v.is_finite() || v < 0.0 {
                return Err(AssessError::ScenarioFile(
                    "velocity_m_per_s must be finite and >= 0".into(),
                ));
            }
        }
        Ok((
            ContactScenario {
                event_type: self.event_type,
                force_phase: self.force_phase,
                geometry: self.geometry,
                configuration: self.configuration,
                injury_measure: self.injury_measure,
                body_part: self.body_part.clone(),
                contact,
                joint_configuration: self.joint_configuration.clone().map(JointConfiguration::new),
                velocity: self.velocity_m_per_s,
                position_label: self.position_label.clone(),
            },
            id,
        ))
    }
}

impl AssessmentReport {
    pub fn to_json(&self) -> serde_json::Value {
        let labels: Vec<String> = self
            .ts_labels
            .iter()
            .map(|l| {
                match l {
                    TsLabel::Transient => "transient",
                    TsLabel::Quasistatic => "quasistatic",
                    TsLabel::Conflicting => "conflicting",
                }
                .to_string()
            })
            .collect();
        serde_json::json!({
            "interpretation": self.interpretation.to_string(),
            "scenario": {
                "event_type": self.scenario.event_type,
                "force_phase": self.scenario.force_phase,
                "geometry": self.scenario.geometry,
                "configuration": self.scenario.configuration,
                "body_part": self.scenario.body_part,
                "velocity_m_per_s": self.scenario.velocity.map(round_sig6),
                "position_label": self.scenario.position_label,
            },
            "body_part": self.scenario.body_part,
            "position_label": self.scenario.position_label,
            "ts_labels": labels,
            "consistency": self.consistency,
            "decision_path": self.decision_path,
            "predicted_force_n": self.predicted_force.map(round_sig6),
            "effective_mass_kg": self.effective_mass.map(round_sig6),
            "threshold_n": round_sig6(self.threshold_applied),
            "verdict": self.verdict,
            "recommended_action": self.recommended_action,
        })
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str("contact scenario assessment\n");
        let event = match self.scenario.event_type {
            EventType::Constrained => "constrained",
            EventType::Unconstrained => "unconstrained",
        };
        let phase = match self.scenario.force_phase {
            ForcePhase::PhaseI => "phase I (dynamic)",
            ForcePhase::PhaseII => "phase II (quasi-static)",
        };
        out.push_str(&format!("  contact:            {event}, {phase}\n"));
        out.push_str(&format!("  body part:          {}\n", self.scenario.body_part));
        if let Some(label) = &self.scenario.position_label {
            out.push_str(&format!("  position:           {label}\n"));
        }
        out.push_str(&format!("  interpretation:     {}\n", self.interpretation));
        let labels: Vec<&str> = self
            .ts_labels
            .iter()
            .map(|l| match l {
                TsLabel::Transient => "transient",
                TsLabel::Quasistatic => "quasistatic",
                TsLabel::Conflicting => "conflicting",
            })
            .collect();
        out.push_str(&format!("  labels:             {}\n", labels.join(" + ")));
        out.push_str(&format!(
            "  decision path:      {}\n",
            self.decision_path.join(" -> ")
        ));
        match self.predicted_force {
            Some(f) => out.push_str(&format!("  predicted force:    {} N\n", sig6(f))),
            None => out.push_str("  predicted force:    requires experiment\n"),
        }
        out.push_str(&format!(
            "  threshold:          {} N\n",
            sig6(self.threshold_applied)
        ));
        out.push_str(&format!("  verdict:            {}\n", self.verdict));
        out.push_str(&format!(
            "  recommended action: {}\n",
            self.recommended_action
        ));
        out
    }
}
