//! Robot descriptions: a serial kinematic chain with per-link mass data,
//! parsed from a strict JSON schema.
//!
//! Chain convention: each link attaches to its parent through its joint.
//! The joint acts in the parent frame (about `joint_axis` for revolute,
//! along it for prismatic); `origin_xyz_m` / `origin_rpy_rad` then place
//! the link frame, in which `com_m` and `inertia_kgm2` are expressed.
//! The last link frame is the flange. Units in files are kg / m / rad;
//! rotations are roll-pitch-yaw applied as Rz·Ry·Rx.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on |axis| - 1 for joint axes in input documents.
pub const UNIT_AXIS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointType {
    Revolute,
    Prismatic,
    Fixed,
}

/// One link of the chain. Fixed joints carry mass (brackets, adapters)
/// but contribute no degree of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub name: String,
    pub joint_type: JointType,
    pub joint_axis: Unit<Vector3<f64>>,
    pub origin_translation: Vector3<f64>,
    pub origin_rotation: [f64; 3],
    pub mass: f64,
    pub com: Vector3<f64>,
    /// Rotational inertia about the COM, link frame `[kg·m²]`.
    pub inertia: Matrix3<f64>,
}

impl LinkSpec {
    pub fn origin_quaternion(&self) -> UnitQuaternion<f64> {
        let [r, p, y] = self.origin_rotation;
        UnitQuaternion::from_euler_angles(r, p, y)
    }
}

/// A validated serial manipulator plus payload and mounting adapter.
/// Immutable after parsing; safe to share across workers.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    pub name: String,
    /// Base to flange.
    pub links: Vec<LinkSpec>,
    pub payload_mass: f64,
    pub adapter_mass: f64,
    /// Labeled workspace positions (e.g. reference-cube C and N), base frame `[m]`.
    pub reference_positions: BTreeMap<String, Vector3<f64>>,
}

impl RobotModel {
    /// Number of non-fixed joints.
    pub fn dof(&self) -> usize {
        self.links
            .iter()
            .filter(|l| l.joint_type != JointType::Fixed)
            .count()
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.links.iter().position(|l| l.name == name)
    }

    /// Payload plus adapter mass: the load term of the simplified mass model.
    pub fn load_mass(&self) -> f64 {
        self.payload_mass + self.adapter_mass
    }

    /// Index of the first link with a non-fixed joint, if any.
    pub fn first_moving_index(&self) -> Option<usize> {
        self.links
            .iter()
            .position(|l| l.joint_type != JointType::Fixed)
    }

    /// Sum of the masses of all links distal to (and including) the first
    /// non-fixed joint. Fixed base structure is excluded.
    pub fn total_moving_mass(&self) -> f64 {
        match self.first_moving_index() {
            Some(i) => self.links[i..].iter().map(|l| l.mass).sum(),
            None => 0.0,
        }
    }

    pub fn reference_position(&self, label: &str) -> Option<Vector3<f64>> {
        self.reference_positions.get(label).copied()
    }
}

/// Joint positions for the non-fixed joints, base to flange `[rad or m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointConfiguration {
    pub values: Vec<f64>,
}

impl JointConfiguration {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl From<Vec<f64>> for JointConfiguration {
    fn from(values: Vec<f64>) -> Self {
        Self { values }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{path}`: {message}")]
    Semantic { path: String, message: String },
}

fn semantic(path: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Semantic {
        path: path.into(),
        message: message.into(),
    }
}

// File-boundary schema. Unknown keys are rejected.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotDoc {
    name: String,
    #[serde(default)]
    payload_mass_kg: f64,
    #[serde(default)]
    adapter_mass_kg: f64,
    links: Vec<LinkDoc>,
    #[serde(default)]
    reference_positions_m: BTreeMap<String, [f64; 3]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkDoc {
    name: String,
    joint_type: JointType,
    joint_axis: [f64; 3],
    origin_xyz_m: [f64; 3],
    origin_rpy_rad: [f64; 3],
    mass_kg: f64,
    com_m: [f64; 3],
    /// `[Ixx, Iyy, Izz, Ixy, Ixz, Iyz]`
    inertia_kgm2: [f64; 6],
}

/// Parse and validate a robot description document.
pub fn parse_robot(text: &str) -> Result<RobotModel, ModelError> {
    let doc: RobotDoc = serde_json::from_str(text).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            ModelError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        } else {
            semantic("document", e.to_string())
        }
    })?;
    validate(doc)
}

/// Serialize back to the external schema. `parse_robot(serialize_robot(m))`
/// reproduces `m` exactly.
pub fn serialize_robot(model: &RobotModel) -> String {
    let doc = RobotDoc {
        name: model.name.clone(),
        payload_mass_kg: model.payload_mass,
        adapter_mass_kg: model.adapter_mass,
        links: model.links.iter().map(link_to_doc).collect(),
        reference_positions_m: model
            .reference_positions
            .iter()
            .map(|(k, v)| (k.clone(), [v.x, v.y, v.z]))
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("robot document serialization")
}

fn link_to_doc(l: &LinkSpec) -> LinkDoc {
    let a = l.joint_axis.into_inner();
    let i = &l.inertia;
    LinkDoc {
        name: l.name.clone(),
        joint_type: l.joint_type,
        joint_axis: [a.x, a.y, a.z],
        origin_xyz_m: [
            l.origin_translation.x,
            l.origin_translation.y,
            l.origin_translation.z,
        ],
        origin_rpy_rad: l.origin_rotation,
        mass_kg: l.mass,
        com_m: [l.com.x, l.com.y, l.com.z],
        inertia_kgm2: [
            i[(0, 0)],
            i[(1, 1)],
            i[(2, 2)],
            i[(0, 1)],
            i[(0, 2)],
            i[(1, 2)],
        ],
    }
}

fn validate(doc: RobotDoc) -> Result<RobotModel, ModelError> {
    if doc.links.is_empty() {
        return Err(semantic("links", "must contain at least one link"));
    }
    if !doc.payload_mass_kg.is_finite() || doc.payload_mass_kg < 0.0 {
        return Err(semantic("payload_mass_kg", "must be finite and >= 0"));
    }
    if !doc.adapter_mass_kg.is_finite() || doc.adapter_mass_kg < 0.0 {
        return Err(semantic("adapter_mass_kg", "must be finite and >= 0"));
    }

    let mut links = Vec::with_capacity(doc.links.len());
    for (idx, l) in doc.links.iter().enumerate() {
        links.push(validate_link(idx, l)?);
    }

    for (idx, l) in links.iter().enumerate() {
        if links[..idx].iter().any(|o| o.name == l.name) {
            return Err(semantic(
                format!("links[{idx}].name"),
                format!("duplicate link name `{}`", l.name),
            ));
        }
    }

    let mut reference_positions = BTreeMap::new();
    for (label, p) in &doc.reference_positions_m {
        if p.iter().any(|c| !c.is_finite()) {
            return Err(semantic(
                format!("reference_positions_m.{label}"),
                "coordinates must be finite",
            ));
        }
        reference_positions.insert(label.clone(), Vector3::new(p[0], p[1], p[2]));
    }

    Ok(RobotModel {
        name: doc.name,
        links,
        payload_mass: doc.payload_mass_kg,
        adapter_mass: doc.adapter_mass_kg,
        reference_positions,
    })
}

fn validate_link(idx: usize, l: &LinkDoc) -> Result<LinkSpec, ModelError> {
    let path = |field: &str| format!("links[{idx}].{field}");

    if !l.mass_kg.is_finite() || l.mass_kg < 0.0 {
        return Err(semantic(path("mass_kg"), "mass must be finite and >= 0"));
    }
    let all = l
        .joint_axis
        .iter()
        .chain(l.origin_xyz_m.iter())
        .chain(l.origin_rpy_rad.iter())
        .chain(l.com_m.iter())
        .chain(l.inertia_kgm2.iter());
    for v in all {
        if !v.is_finite() {
            return Err(semantic(path("…"), "all numeric fields must be finite"));
        }
    }

    let axis = Vector3::new(l.joint_axis[0], l.joint_axis[1], l.joint_axis[2]);
    let joint_axis = if l.joint_type == JointType::Fixed {
        // Axis is unused for fixed joints; accept any placeholder.
        Unit::new_unchecked(Vector3::z())
    } else {
        if (axis.norm() - 1.0).abs() > UNIT_AXIS_TOL {
            return Err(semantic(
                path("joint_axis"),
                format!("must have unit norm (|axis| = {})", axis.norm()),
            ));
        }
        Unit::new_unchecked(axis)
    };

    let [ixx, iyy, izz, ixy, ixz, iyz] = l.inertia_kgm2;
    let inertia = Matrix3::new(ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz);
    let eig = nalgebra::linalg::SymmetricEigen::new(inertia);
    let max_eig = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let psd_tol = 1e-9 * (1.0 + max_eig);
    if eig.eigenvalues.iter().any(|&e| e < -psd_tol) {
        return Err(semantic(
            path("inertia_kgm2"),
            "inertia tensor must be positive semidefinite",
        ));
    }

    Ok(LinkSpec {
        name: l.name.clone(),
        joint_type: l.joint_type,
        joint_axis,
        origin_translation: Vector3::new(l.origin_xyz_m[0], l.origin_xyz_m[1], l.origin_xyz_m[2]),
        origin_rotation: l.origin_rpy_rad,
        mass: l.mass_kg,
        com: Vector3::new(l.com_m[0], l.com_m[1], l.com_m[2]),
        inertia,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_LINK: &str = include_str!("../tests/fixtures/one_link.json");
    const TM5_LIKE: &str = include_str!("../tests/fixtures/tm5_like.json");
    const SEVEN_LINK: &str = include_str!("../tests/fixtures/seven_link.json");

    #[test]
    fn minimal_document_parses() {
        let m = parse_robot(ONE_LINK).unwrap();
        assert_eq!(m.dof(), 1);
        assert_eq!(m.links[0].mass, 2.0);
        assert_eq!(m.total_moving_mass(), 2.0);
    }

    #[test]
    fn negative_mass_names_the_field() {
        let text = ONE_LINK.replace("\"mass_kg\": 2.0", "\"mass_kg\": -1.0");
        let err = parse_robot(&text).unwrap_err();
        match err {
            ModelError::Semantic { path, .. } => assert!(path.contains("links[0].mass")),
            other => panic!("expected semantic error, got {other:?}"),
        }
    }

    #[test]
    fn non_unit_axis_rejected() {
        let text = ONE_LINK.replace("[0.0, 0.0, 1.0]", "[0.0, 0.0, 1.5]");
        let err = parse_robot(&text).unwrap_err();
        match err {
            ModelError::Semantic { path, .. } => assert!(path.contains("joint_axis")),
            other => panic!("expected semantic error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = ONE_LINK.replacen('{', "{\"vendor\": \"x\",", 1);
        assert!(parse_robot(&text).is_err());
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_robot("{ \"name\": ").unwrap_err();
        assert!(matches!(err, ModelError::Syntax { .. }));
    }

    #[test]
    fn fixed_base_excluded_from_moving_mass() {
        let m = parse_robot(TM5_LIKE).unwrap();
        assert!(m.links[0].joint_type == JointType::Fixed);
        assert!((m.total_moving_mass() - 21.5).abs() < 1e-12);
        assert!((m.load_mass() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn seven_link_mass_is_link_sum() {
        let m = parse_robot(SEVEN_LINK).unwrap();
        assert_eq!(m.dof(), 7);
        assert_eq!(m.payload_mass, 0.0);
        let expected: f64 = m.links[m.first_moving_index().unwrap()..]
            .iter()
            .map(|l| l.mass)
            .sum();
        assert_eq!(m.total_moving_mass(), expected);
    }

    #[test]
    fn serialize_round_trip_is_stable() {
        for text in [ONE_LINK, TM5_LIKE, SEVEN_LINK] {
            let first = parse_robot(text).unwrap();
            let second = parse_robot(&serialize_robot(&first)).unwrap();
            assert_eq!(first, second);
        }
    }
}
