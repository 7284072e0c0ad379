//! Structural properties of the dynamics layer over the fixture models
//! and randomized configurations: mass-matrix symmetry and positive
//! definiteness, the energy identity against an independent twist
//! recursion, Jacobians against finite differences, and the variational
//! characterization of the reflected mass.

mod support;

use nalgebra::{DVector, Point3, Vector3};
use pfl_core::dynamics::{
    contact_jacobian, forward_kinematics, mass_matrix, reflected_mass, ContactFrame, ReflectedMass,
};
use pfl_core::robot_model::JointConfiguration;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

fn fixtures() -> Vec<pfl_core::RobotModel> {
    vec![
        fixture(ONE_LINK),
        fixture(TWO_LINK),
        fixture(TM5_LIKE),
        fixture(UR10E_LIKE),
        fixture(SEVEN_LINK),
    ]
}

#[test]
fn mass_matrix_symmetric_and_positive_definite() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for model in fixtures() {
        for _ in 0..100 {
            let q = random_q(&mut rng, model.dof());
            let m = mass_matrix(&model, &q).unwrap();
            let values = m.values();
            let scale = values.amax();
            for i in 0..values.nrows() {
                for j in 0..values.ncols() {
                    let asym = (values[(i, j)] - values[(j, i)]).abs();
                    assert!(asym <= 1e-10 * scale, "{}: asymmetry {asym}", model.name);
                }
            }
            assert!(
                m.min_eigenvalue() > 0.0,
                "{}: mass matrix must be positive definite",
                model.name
            );
        }
    }
}

#[test]
fn energy_identity_against_twist_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for model in fixtures() {
        for _ in 0..100 {
            let q = random_q(&mut rng, model.dof());
            let qdot: Vec<f64> = (0..model.dof()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let from_matrix = mass_matrix(&model, &q).unwrap().kinetic_energy(&qdot);
            let from_recursion = kinetic_energy_recursion(&model, &q, &qdot);
            let scale = from_recursion.abs().max(1e-12);
            assert!(
                (from_matrix - from_recursion).abs() / scale < 1e-9,
                "{}: {from_matrix} vs {from_recursion}",
                model.name
            );
        }
    }
}

#[test]
fn two_link_matches_the_closed_form() {
    let model = fixture(TWO_LINK);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let q = random_q(&mut rng, 2);
        let m = mass_matrix(&model, &q).unwrap();
        let reference = two_link_mass_closed_form(4.0, 2.5, 0.5, 0.5, q.values[1]);
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (m.values()[(i, j)] - reference[(i, j)]).abs() <= 1e-10 * reference.amax(),
                    "entry ({i},{j}): {} vs {}",
                    m.values()[(i, j)],
                    reference[(i, j)]
                );
            }
        }
    }
}

/// Central differences of the flange position over each joint, h = 1e-7.
fn finite_difference_jacobian(
    model: &pfl_core::RobotModel,
    q: &JointConfiguration,
    contact: &ContactFrame,
) -> Vec<Vector3<f64>> {
    let h = 1e-7;
    let link = model.link_index(&contact.attached_link).unwrap();
    // Express the contact point in the link frame once, then track it.
    let pose = forward_kinematics(model, q).unwrap()[link];
    let local = pose.inverse() * contact.point;

    (0..model.dof())
        .map(|j| {
            let mut plus = q.clone();
            plus.values[j] += h;
            let mut minus = q.clone();
            minus.values[j] -= h;
            let p_plus = forward_kinematics(model, &plus).unwrap()[link] * local;
            let p_minus = forward_kinematics(model, &minus).unwrap()[link] * local;
            (p_plus - p_minus) / (2.0 * h)
        })
        .collect()
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for model in fixtures() {
        let flange = model.links.last().unwrap().name.clone();
        for _ in 0..25 {
            let q = random_q(&mut rng, model.dof());
            let pose = *forward_kinematics(&model, &q).unwrap().last().unwrap();
            let point = pose * Point3::new(0.05, 0.0, 0.02);
            let contact = ContactFrame::new(point, Vector3::x(), flange.clone()).unwrap();
            let j = contact_jacobian(&model, &q, &contact).unwrap();
            let fd = finite_difference_jacobian(&model, &q, &contact);
            for (col, fd_col) in fd.iter().enumerate() {
                for row in 0..3 {
                    assert!(
                        (j[(row, col)] - fd_col[row]).abs() <= 1e-6,
                        "{}: J[{row},{col}] = {} vs fd {}",
                        model.name,
                        j[(row, col)],
                        fd_col[row]
                    );
                }
            }
        }
    }
}

#[test]
fn reflected_mass_is_the_constrained_energy_minimum() {
    let model = fixture(TWO_LINK);
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    let mut checked = 0;
    while checked < 50 {
        let q = random_q(&mut rng, 2);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let u = Vector3::new(angle.cos(), angle.sin(), 0.0);
        let pose = *forward_kinematics(&model, &q).unwrap().last().unwrap();
        let contact = ContactFrame::new(
            Point3::from(pose.translation.vector),
            u,
            "link2",
        )
        .unwrap();

        let m = mass_matrix(&model, &q).unwrap();
        let j = contact_jacobian(&model, &q, &contact).unwrap();
        let a = DVector::from_vec(vec![
            j[(0, 0)] * u.x + j[(1, 0)] * u.y + j[(2, 0)] * u.z,
            j[(0, 1)] * u.x + j[(1, 1)] * u.y + j[(2, 1)] * u.z,
        ]);
        let refl = reflected_mass(&model, &q, &contact).unwrap();

        // Skip directions too close to immovable: the constraint becomes
        // degenerate and the search area unbounded.
        let ReflectedMass::Finite(m_u) = refl else {
            continue;
        };
        if m_u > 1e6 {
            continue;
        }

        let oracle = constrained_energy_minimum_2dof(m.values(), &a);
        assert!(
            (m_u - oracle).abs() / oracle < 1e-6,
            "reflected {m_u} vs oracle {oracle} at q = {:?}",
            q.values
        );
        checked += 1;
    }
}

#[test]
fn variational_bound_and_lagrange_minimizer() {
    let model = fixture(TWO_LINK);
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut checked = 0;
    while checked < 30 {
        let q = random_q(&mut rng, 2);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let u = Vector3::new(angle.cos(), angle.sin(), 0.0);
        let pose = *forward_kinematics(&model, &q).unwrap().last().unwrap();
        let contact =
            ContactFrame::new(Point3::from(pose.translation.vector), u, "link2").unwrap();

        let ReflectedMass::Finite(m_u) = reflected_mass(&model, &q, &contact).unwrap() else {
            continue;
        };
        if m_u > 1e6 {
            continue;
        }

        let m = mass_matrix(&model, &q).unwrap();
        let j = contact_jacobian(&model, &q, &contact).unwrap();
        let a = DVector::from_vec(vec![
            j.column(0).dot(&DVector::from_vec(vec![u.x, u.y, u.z])),
            j.column(1).dot(&DVector::from_vec(vec![u.x, u.y, u.z])),
        ]);

        // Lagrange minimizer q̇* = M⁻¹a / (aᵀM⁻¹a) attains the bound.
        let minv_a = nalgebra::linalg::Cholesky::new(m.values().clone())
            .unwrap()
            .solve(&a);
        let quad = a.dot(&minv_a);
        let q_star = &minv_a / quad;
        assert!((a.dot(&q_star) - 1.0).abs() < 1e-9, "minimizer is feasible");
        let e_star = (q_star.transpose() * m.values() * &q_star)[(0, 0)];
        assert!(
            (e_star - m_u).abs() / m_u < 1e-8,
            "minimizer energy {e_star} vs reflected {m_u}"
        );

        // Any feasible velocity has at least that energy.
        let null = DVector::from_vec(vec![-a[1], a[0]]);
        for _ in 0..20 {
            let qdot = &q_star + &null * rng.gen_range(-3.0..3.0);
            let e = (qdot.transpose() * m.values() * &qdot)[(0, 0)];
            assert!(e >= m_u * (1.0 - 1e-9));
        }
        checked += 1;
    }
}

#[test]
fn reflected_mass_invariant_under_direction_sign_and_scale() {
    let model = fixture(TM5_LIKE);
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    for _ in 0..20 {
        let q = random_q(&mut rng, model.dof());
        let pose = *forward_kinematics(&model, &q).unwrap().last().unwrap();
        let point = Point3::from(pose.translation.vector);
        let dir = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if dir.norm() < 0.2 {
            continue;
        }
        let base = ContactFrame::new(point, dir, "flange").unwrap();
        let flipped = ContactFrame::new(point, -dir, "flange").unwrap();
        let scaled = ContactFrame::new(point, dir * 7.3, "flange").unwrap();
        let a = reflected_mass(&model, &q, &base).unwrap();
        let b = reflected_mass(&model, &q, &flipped).unwrap();
        let c = reflected_mass(&model, &q, &scaled).unwrap();
        match (a, b, c) {
            (ReflectedMass::Finite(x), ReflectedMass::Finite(y), ReflectedMass::Finite(z)) => {
                assert!((x - y).abs() <= 1e-9 * x.abs());
                assert!((x - z).abs() <= 1e-9 * x.abs());
            }
            (ReflectedMass::Unbounded, ReflectedMass::Unbounded, ReflectedMass::Unbounded) => {}
            other => panic!("inconsistent under sign/scale: {other:?}"),
        }
    }
}
