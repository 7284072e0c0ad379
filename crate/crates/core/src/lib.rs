//! Contact-safety assessment toolkit for power-and-force-limited
//! collaborative robot cells.
//!
//! The crate covers the full desk-side assessment pipeline: robot
//! descriptions ([`robot_model`]), reflected-mass rigid-body dynamics
//! ([`dynamics`]), the closed-form contact-force model and body-part data
//! ([`contact_model`]), scenario classification and the assessment decision
//! tree ([`risk_engine`]), force-trace evaluation ([`trace`]), a 1-D impact
//! simulator ([`impact_sim`]), constrained-collision force maps ([`ccfm`]),
//! and wall-clock cost estimation for experimental validation ([`cost`]).

pub mod ccfm;
pub mod contact_model;
pub mod cost;
pub mod dynamics;
pub mod impact_sim;
pub mod numfmt;
pub mod risk_engine;
pub mod robot_model;
pub mod trace;

pub use contact_model::{BodyPartParams, BodyPartTable, HumanMass};
pub use dynamics::{ContactFrame, MassMatrix, ReflectedMass};
pub use risk_engine::{AssessmentReport, ContactScenario, Interpretation, Verdict};
pub use robot_model::{JointConfiguration, RobotModel};
pub use trace::{ForceTrace, TraceVerdict};
