//! Shared fixtures and independent oracles for the integration suites.
//!
//! The oracles deliberately avoid the library's Jacobian/mass-matrix
//! assembly: kinetic energy comes from a direct velocity recursion down
//! the chain, the two-link mass matrix from its closed form, and the
//! reflected mass from a 1-D search over the constraint's null space.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use pfl_core::robot_model::{parse_robot, JointConfiguration, JointType, RobotModel};
use rand::Rng;

pub const ONE_LINK: &str = include_str!("../fixtures/one_link.json");
pub const TWO_LINK: &str = include_str!("../fixtures/two_link_planar.json");
pub const TM5_LIKE: &str = include_str!("../fixtures/tm5_like.json");
pub const UR10E_LIKE: &str = include_str!("../fixtures/ur10e_like.json");
pub const SEVEN_LINK: &str = include_str!("../fixtures/seven_link.json");

pub fn fixture(text: &str) -> RobotModel {
    parse_robot(text).expect("fixture parses")
}

pub fn random_q<R: Rng>(rng: &mut R, dof: usize) -> JointConfiguration {
    JointConfiguration::new(
        (0..dof)
            .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect(),
    )
}

/// Kinetic energy by propagating twists link to link — no Jacobians.
pub fn kinetic_energy_recursion(model: &RobotModel, q: &JointConfiguration, qdot: &[f64]) -> f64 {
    let mut t = Isometry3::<f64>::identity();
    let mut omega = Vector3::zeros();
    let mut v_origin = Vector3::zeros();
    let mut qi = 0usize;
    let mut total = 0.0;

    for link in &model.links {
        let p_parent = t.translation.vector;
        let axis_w = t.rotation * link.joint_axis.into_inner();

        let (qv, qdv) = match link.joint_type {
            JointType::Fixed => (0.0, 0.0),
            _ => {
                let pair = (q.values[qi], qdot[qi]);
                qi += 1;
                pair
            }
        };

        let (omega_next, slide, joint) = match link.joint_type {
            JointType::Revolute => (
                omega + axis_w * qdv,
                Vector3::zeros(),
                Isometry3::from_parts(
                    Translation3::identity(),
                    UnitQuaternion::from_axis_angle(&link.joint_axis, qv),
                ),
            ),
            JointType::Prismatic => (
                omega,
                axis_w * qdv,
                Isometry3::from_parts(
                    Translation3::from(link.joint_axis.into_inner() * qv),
                    UnitQuaternion::identity(),
                ),
            ),
            JointType::Fixed => (omega, Vector3::zeros(), Isometry3::identity()),
        };
        let origin = Isometry3::from_parts(
            Translation3::from(link.origin_translation),
            link.origin_quaternion(),
        );
        t = t * joint * origin;

        let p_new = t.translation.vector;
        v_origin = v_origin + slide + omega_next.cross(&(p_new - p_parent));
        omega = omega_next;

        let com_w = t * Point3::from(link.com);
        let v_com = v_origin + omega.cross(&(com_w.coords - p_new));
        let rot = t.rotation.to_rotation_matrix();
        let inertia_w = rot.matrix() * link.inertia * rot.matrix().transpose();
        total += 0.5 * link.mass * v_com.norm_squared() + 0.5 * omega.dot(&(inertia_w * omega));
    }
    total
}

/// Closed-form mass matrix of a planar two-link arm with point masses at
/// the link ends.
pub fn two_link_mass_closed_form(
    m1: f64,
    m2: f64,
    l1: f64,
    l2: f64,
    q2: f64,
) -> DMatrix<f64> {
    let c2 = q2.cos();
    let m11 = m1 * l1 * l1 + m2 * (l1 * l1 + 2.0 * l1 * l2 * c2 + l2 * l2);
    let m12 = m2 * (l2 * l2 + l1 * l2 * c2);
    let m22 = m2 * l2 * l2;
    DMatrix::from_row_slice(2, 2, &[m11, m12, m12, m22])
}

/// Brute-force minimum of q̇ᵀMq̇ subject to aᵀq̇ = 1, for 2-DOF systems:
/// the feasible set is a line, searched directly (golden-section style
/// ternary narrowing on the convex 1-D objective).
pub fn constrained_energy_minimum_2dof(m: &DMatrix<f64>, a: &DVector<f64>) -> f64 {
    assert_eq!(m.nrows(), 2);
    let norm2 = a.dot(a);
    assert!(norm2 > 1e-12, "constraint must be non-degenerate");
    let q0 = a / norm2; // feasible: aᵀ q0 = 1
    let null = DVector::from_vec(vec![-a[1], a[0]]) / norm2.sqrt();

    let energy = |z: f64| {
        let q = &q0 + &null * z;
        (q.transpose() * m * &q)[(0, 0)]
    };

    // Bracket the parabola's minimum, then narrow.
    let mut lo = -1e6;
    let mut hi = 1e6;
    for _ in 0..400 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if energy(m1) < energy(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    energy(0.5 * (lo + hi))
}
