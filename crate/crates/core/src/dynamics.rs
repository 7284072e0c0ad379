//! Forward kinematics, contact-point Jacobians, the joint-space mass
//! matrix, and the direction-dependent reflected mass of a serial chain.
//!
//! The reflected mass perceived at a contact point along a unit direction
//! `u` is `(uᵀ Λ⁻¹ u)⁻¹` with `Λ⁻¹ = J M⁻¹ Jᵀ`, where `J` is the 3×n
//! translational Jacobian at the point of contact and `M(q)` the
//! joint-space mass matrix. Only the translational block enters;
//! rotational impact coupling is ignored. Directions the chain cannot
//! excite (`uᵀΛ⁻¹u` below [`SINGULAR_DIRECTION_TOL`]) are reported as
//! unbounded.

use nalgebra::{DMatrix, Isometry3, Point3, Translation3, Unit, UnitQuaternion, Vector3};
use thiserror::Error;

use crate::robot_model::{JointConfiguration, JointType, RobotModel};

/// Directions with uᵀΛ⁻¹u below this (in 1/kg) cannot be excited by the
/// chain; the reflected mass there is reported as unbounded. Also drives
/// the near-singular branch of the assessment tree.
pub const SINGULAR_DIRECTION_TOL: f64 = 1e-9;

/// Finite stand-in when an unbounded reflected mass must enter arithmetic.
pub const REFLECTED_MASS_CAP: f64 = 1e9;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("joint configuration has {got} values but the model has {expected} degrees of freedom")]
    DofMismatch { expected: usize, got: usize },
    #[error("unknown link `{0}`")]
    UnknownLink(String),
    #[error("contact direction has near-zero norm")]
    ZeroDirection,
    #[error("mass matrix is not positive definite; check link mass and inertia data")]
    SingularMassMatrix,
    #[error("model has no non-fixed joint")]
    NoMovingJoint,
}

/// A contact location on the robot: base-frame point and unit impact
/// direction, rigidly attached to `attached_link` at the configuration
/// under analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactFrame {
    pub point: Point3<f64>,
    pub direction: Unit<Vector3<f64>>,
    pub attached_link: String,
}

impl ContactFrame {
    /// Normalizes `direction`; its scale and sign do not affect results.
    pub fn new(
        point: Point3<f64>,
        direction: Vector3<f64>,
        attached_link: impl Into<String>,
    ) -> Result<Self, DynamicsError> {
        let norm = direction.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(DynamicsError::ZeroDirection);
        }
        Ok(Self {
            point,
            direction: Unit::new_normalize(direction),
            attached_link: attached_link.into(),
        })
    }
}

/// Joint-space mass matrix M(q): symmetric, positive definite for
/// physically valid models.
#[derive(Debug, Clone, PartialEq)]
pub struct MassMatrix(DMatrix<f64>);

impl MassMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// ½ q̇ᵀ M q̇
    pub fn kinetic_energy(&self, qdot: &[f64]) -> f64 {
        let n = self.0.nrows();
        assert_eq!(qdot.len(), n, "velocity length must match DOF");
        let mut e = 0.0;
        for i in 0..n {
            for j in 0..n {
                e += qdot[i] * self.0[(i, j)] * qdot[j];
            }
        }
        0.5 * e
    }

    pub fn min_eigenvalue(&self) -> f64 {
        nalgebra::linalg::SymmetricEigen::new(self.0.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Reflected mass along a contact direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReflectedMass {
    Finite(f64),
    /// The direction lies in the null space of the point Jacobian.
    Unbounded,
}

impl ReflectedMass {
    pub fn is_unbounded(&self) -> bool {
        matches!(self, ReflectedMass::Unbounded)
    }

    /// Finite value, with unbounded clamped to [`REFLECTED_MASS_CAP`].
    pub fn capped(self) -> f64 {
        match self {
            ReflectedMass::Finite(m) => m,
            ReflectedMass::Unbounded => REFLECTED_MASS_CAP,
        }
    }
}

impl std::fmt::Display for ReflectedMass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReflectedMass::Finite(m) => write!(f, "{m}"),
            ReflectedMass::Unbounded => write!(f, "unbounded"),
        }
    }
}

struct WorldJoint {
    joint_type: JointType,
    /// Joint axis in the base frame.
    axis: Vector3<f64>,
    /// A point on the joint axis, base frame.
    anchor: Vector3<f64>,
    q_index: usize,
}

type ChainKinematics = (Vec<Isometry3<f64>>, Vec<Option<WorldJoint>>);

/// Per-link base-frame poses plus world joint data, shared by all
/// kinematic quantities.
fn chain_frames(
    model: &RobotModel,
    q: &JointConfiguration,
) -> Result<ChainKinematics, DynamicsError> {
    let dof = model.dof();
    if q.len() != dof {
        return Err(DynamicsError::DofMismatch {
            expected: dof,
            got: q.len(),
        });
    }

    let mut poses = Vec::with_capacity(model.links.len());
    let mut joints = Vec::with_capacity(model.links.len());
    let mut t = Isometry3::identity();
    let mut qi = 0usize;

    for link in &model.links {
        let joint = match link.joint_type {
            JointType::Fixed => {
                joints.push(None);
                Isometry3::identity()
            }
            JointType::Revolute => {
                let axis_w = t.rotation * link.joint_axis.into_inner();
                joints.push(Some(WorldJoint {
                    joint_type: JointType::Revolute,
                    axis: axis_w,
                    anchor: t.translation.vector,
                    q_index: qi,
                }));
                let rot = UnitQuaternion::from_axis_angle(&link.joint_axis, q.values[qi]);
                qi += 1;
                Isometry3::from_parts(Translation3::identity(), rot)
            }
            JointType::Prismatic => {
                let axis_w = t.rotation * link.joint_axis.into_inner();
                joints.push(Some(WorldJoint {
                    joint_type: JointType::Prismatic,
                    axis: axis_w,
                    anchor: t.translation.vector,
                    q_index: qi,
                }));
                let shift = Translation3::from(link.joint_axis.into_inner() * q.values[qi]);
                qi += 1;
                Isometry3::from_parts(shift, UnitQuaternion::identity())
            }
        };
        let origin = Isometry3::from_parts(
            Translation3::from(link.origin_translation),
            link.origin_quaternion(),
        );
        t = t * joint * origin;
        poses.push(t);
    }

    Ok((poses, joints))
}

/// Base-frame pose of every link (base to flange order).
pub fn forward_kinematics(
    model: &RobotModel,
    q: &JointConfiguration,
) -> Result<Vec<Isometry3<f64>>, DynamicsError> {
    Ok(chain_frames(model, q)?.0)
}

/// Linear-velocity Jacobian of a base-frame point rigidly attached to the
/// link at `link_index`: columns for joints past that link are zero.
fn point_jacobian(
    joints: &[Option<WorldJoint>],
    link_index: usize,
    point: &Vector3<f64>,
    dof: usize,
) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(3, dof);
    for wj in joints[..=link_index].iter().flatten() {
        let col = match wj.joint_type {
            JointType::Revolute => wj.axis.cross(&(point - wj.anchor)),
            JointType::Prismatic => wj.axis,
            JointType::Fixed => unreachable!("fixed joints carry no world joint"),
        };
        for r in 0..3 {
            j[(r, wj.q_index)] = col[r];
        }
    }
    j
}

/// 3×n translational Jacobian at the contact point: v_point = J q̇.
pub fn contact_jacobian(
    model: &RobotModel,
    q: &JointConfiguration,
    contact: &ContactFrame,
) -> Result<DMatrix<f64>, DynamicsError> {
    let link_index = model
        .link_index(&contact.attached_link)
        .ok_or_else(|| DynamicsError::UnknownLink(contact.attached_link.clone()))?;
    let (_, joints) = chain_frames(model, q)?;
    Ok(point_jacobian(
        &joints,
        link_index,
        &contact.point.coords,
        model.dof(),
    ))
}

/// Joint-space mass matrix, assembled by per-link Jacobian accumulation:
/// M = Σᵢ (J_com,iᵀ mᵢ J_com,i + J_ω,iᵀ Iᵢ_world J_ω,i).
pub fn mass_matrix(model: &RobotModel, q: &JointConfiguration) -> Result<MassMatrix, DynamicsError> {
    let dof = model.dof();
    if dof == 0 {
        return Err(DynamicsError::NoMovingJoint);
    }
    let (poses, joints) = chain_frames(model, q)?;
    let mut m = DMatrix::zeros(dof, dof);

    for (i, link) in model.links.iter().enumerate() {
        let pose = &poses[i];
        let com_w = pose * Point3::from(link.com);
        let rot = pose.rotation.to_rotation_matrix();
        let inertia_w = rot.matrix() * link.inertia * rot.matrix().transpose();

        let jv = point_jacobian(&joints, i, &com_w.coords, dof);
        let mut jw = DMatrix::zeros(3, dof);
        for wj in joints[..=i].iter().flatten() {
            if wj.joint_type == JointType::Revolute {
                for r in 0..3 {
                    jw[(r, wj.q_index)] = wj.axis[r];
                }
            }
        }

        m += link.mass * jv.transpose() * &jv;
        m += jw.transpose() * inertia_w * &jw;
    }

    Ok(MassMatrix(m))
}

/// Reflected mass at the contact point along its direction,
/// `(uᵀ (J M⁻¹ Jᵀ) u)⁻¹`, using the translational Jacobian block only.
pub fn reflected_mass(
    model: &RobotModel,
    q: &JointConfiguration,
    contact: &ContactFrame,
) -> Result<ReflectedMass, DynamicsError> {
    let m = mass_matrix(model, q)?;
    let j = contact_jacobian(model, q, contact)?;
    let chol =
        nalgebra::linalg::Cholesky::new(m.0).ok_or(DynamicsError::SingularMassMatrix)?;
    let minv_jt = chol.solve(&j.transpose());
    let lambda_inv = &j * minv_jt; // 3×3

    let u = contact.direction.into_inner();
    let mut quad = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            quad += u[a] * lambda_inv[(a, b)] * u[b];
        }
    }

    if quad < SINGULAR_DIRECTION_TOL {
        Ok(ReflectedMass::Unbounded)
    } else {
        Ok(ReflectedMass::Finite(1.0 / quad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robot_model::parse_robot;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    const ONE_LINK: &str = include_str!("../tests/fixtures/one_link.json");
    const TWO_LINK: &str = include_str!("../tests/fixtures/two_link_planar.json");

    fn q1(v: f64) -> JointConfiguration {
        JointConfiguration::new(vec![v])
    }

    #[test]
    fn one_link_fk_at_zero_is_origin_translation() {
        let m = parse_robot(ONE_LINK).unwrap();
        let poses = forward_kinematics(&m, &q1(0.0)).unwrap();
        let p = poses[0].translation.vector;
        assert_relative_eq!(p, Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn one_link_quarter_turn() {
        let m = parse_robot(ONE_LINK).unwrap();
        let poses = forward_kinematics(&m, &q1(FRAC_PI_2)).unwrap();
        let p = poses[0].translation.vector;
        assert_relative_eq!(p, Vector3::new(0.0, 1.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn two_link_fk_hand_evaluated() {
        let m = parse_robot(TWO_LINK).unwrap();
        let q = JointConfiguration::new(vec![std::f64::consts::FRAC_PI_4; 2]);
        let poses = forward_kinematics(&m, &q).unwrap();
        let p = poses[1].translation.vector;
        let c45 = std::f64::consts::FRAC_PI_4.cos();
        let expected = Vector3::new(0.5 * c45, 0.5 * c45 + 0.5, 0.0);
        assert_relative_eq!(p, expected, epsilon = 1e-12);
    }

    #[test]
    fn dof_mismatch_reported() {
        let m = parse_robot(ONE_LINK).unwrap();
        let err = forward_kinematics(&m, &JointConfiguration::new(vec![0.0, 0.0])).unwrap_err();
        assert_eq!(err, DynamicsError::DofMismatch { expected: 1, got: 2 });
    }

    #[test]
    fn one_link_jacobian_column() {
        let m = parse_robot(ONE_LINK).unwrap();
        let contact =
            ContactFrame::new(Point3::new(1.0, 0.0, 0.0), Vector3::y(), "link1").unwrap();
        let j = contact_jacobian(&m, &q1(0.0), &contact).unwrap();
        assert_relative_eq!(j[(0, 0)], 0.0);
        assert_relative_eq!(j[(1, 0)], 1.0);
        assert_relative_eq!(j[(2, 0)], 0.0);
    }

    #[test]
    fn prismatic_jacobian_is_axis_independent_of_q() {
        let text = ONE_LINK
            .replace("\"revolute\"", "\"prismatic\"")
            .replace("[0.0, 0.0, 1.0]", "[1.0, 0.0, 0.0]");
        let m = parse_robot(&text).unwrap();
        for qv in [0.0, 0.3, -1.2] {
            let contact =
                ContactFrame::new(Point3::new(1.0 + qv, 0.0, 0.0), Vector3::x(), "link1").unwrap();
            let j = contact_jacobian(&m, &q1(qv), &contact).unwrap();
            assert_relative_eq!(j[(0, 0)], 1.0);
            assert_relative_eq!(j[(1, 0)], 0.0);
            assert_relative_eq!(j[(2, 0)], 0.0);
        }
    }

    #[test]
    fn unknown_link_rejected() {
        let m = parse_robot(ONE_LINK).unwrap();
        let contact = ContactFrame::new(Point3::origin(), Vector3::x(), "nope").unwrap();
        assert!(matches!(
            contact_jacobian(&m, &q1(0.0), &contact),
            Err(DynamicsError::UnknownLink(_))
        ));
    }

    #[test]
    fn point_mass_mass_matrix() {
        let m = parse_robot(ONE_LINK).unwrap();
        for qv in [0.0, 0.7, -2.1] {
            let mm = mass_matrix(&m, &q1(qv)).unwrap();
            assert_relative_eq!(mm.values()[(0, 0)], 2.0 * 1.0 * 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn reflected_mass_tangential_is_link_mass() {
        let m = parse_robot(ONE_LINK).unwrap();
        let contact =
            ContactFrame::new(Point3::new(1.0, 0.0, 0.0), Vector3::y(), "link1").unwrap();
        match reflected_mass(&m, &q1(0.0), &contact).unwrap() {
            ReflectedMass::Finite(v) => assert_relative_eq!(v, 2.0, epsilon = 1e-12),
            ReflectedMass::Unbounded => panic!("tangential direction must be finite"),
        }
    }

    #[test]
    fn reflected_mass_radial_is_unbounded() {
        let m = parse_robot(ONE_LINK).unwrap();
        let contact =
            ContactFrame::new(Point3::new(1.0, 0.0, 0.0), Vector3::x(), "link1").unwrap();
        assert!(reflected_mass(&m, &q1(0.0), &contact)
            .unwrap()
            .is_unbounded());
    }

    #[test]
    fn zero_direction_rejected() {
        assert_eq!(
            ContactFrame::new(Point3::origin(), Vector3::zeros(), "link1").unwrap_err(),
            DynamicsError::ZeroDirection
        );
    }
}
