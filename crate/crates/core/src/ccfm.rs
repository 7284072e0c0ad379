//! Constrained-collision force maps: expected peak contact force over a
//! (position × velocity) grid for one robot and one body part, with CSV
//! and SVG export and a conservative velocity lookup.
//!
//! Cells come either from the closed-form force model (simplified or
//! reflected robot mass), from the impact simulator, or from an imported
//! measurement CSV. Lookup never interpolates: it returns the largest
//! grid velocity at or below the threshold (floor semantics).

use nalgebra::{Unit, Vector3};
use thiserror::Error;

use crate::contact_model::{
    contact_force, effective_mass, iso_robot_mass, BodyPartParams, ContactModelError,
    EffectiveMassSpec, HumanMass, HumanMassMode, RobotMassMode,
};
use crate::dynamics::{reflected_mass, ContactFrame, DynamicsError};
use crate::impact_sim::{simulate, ImpactConfig, ImpactError};
use crate::numfmt::sig6;
use crate::robot_model::{JointConfiguration, RobotModel};

#[derive(Debug, Error)]
pub enum CcfmError {
    #[error("the grid needs at least one position and one velocity")]
    EmptyGrid,
    #[error("velocities must be strictly increasing")]
    NonIncreasingVelocities,
    #[error("position `{0}` is unreachable: no joint configuration supplied")]
    MissingConfiguration(String),
    #[error("position `{0}` needs a contact direction for reflected-mass cells")]
    MissingDirection(String),
    #[error("unknown position `{0}`")]
    UnknownPosition(String),
    #[error("position label `{0}` must not contain commas or line breaks")]
    BadLabel(String),
    #[error("import error at line {line}: {message}")]
    Import { line: usize, message: String },
    #[error(transparent)]
    ContactModel(#[from] ContactModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Impact(#[from] ImpactError),
}

/// Where the cells of a map come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSource {
    /// Closed form, simplified robot mass, body-part human mass.
    ModelA,
    /// Closed form, simplified robot mass, constrained human.
    ModelB1,
    /// Closed form, reflected robot mass per position, constrained human.
    ModelB2,
    /// Impact simulator peaks under the given mass bindings.
    Simulated(EffectiveMassSpec),
    /// Loaded from a measurement CSV.
    MeasuredImport,
}

impl GridSource {
    pub fn tag(&self) -> &'static str {
        match self {
            GridSource::ModelA => "model_A",
            GridSource::ModelB1 => "model_B1",
            GridSource::ModelB2 => "model_B2",
            GridSource::Simulated(_) => "simulated",
            GridSource::MeasuredImport => "measured-import",
        }
    }
}

/// A position to evaluate; joint configuration and contact direction are
/// needed only for reflected-mass cells.
#[derive(Debug, Clone)]
pub struct MapPosition {
    pub label: String,
    /// Base-frame coordinates `[m]`.
    pub point: Vector3<f64>,
    pub joint_configuration: Option<JointConfiguration>,
    pub direction: Option<Unit<Vector3<f64>>>,
}

impl MapPosition {
    pub fn new(label: impl Into<String>, point: Vector3<f64>) -> Self {
        Self {
            label: label.into(),
            point,
            joint_configuration: None,
            direction: None,
        }
    }
}

/// Forces `[N]` over (position × velocity), one row per position.
#[derive(Debug, Clone)]
pub struct CCFMGrid {
    pub robot: String,
    pub body_part: String,
    pub positions: Vec<(String, Vector3<f64>)>,
    pub velocities: Vec<f64>,
    pub forces: Vec<Vec<f64>>,
    pub source: GridSource,
}

impl CCFMGrid {
    fn position_row(&self, label: &str) -> Result<&[f64], CcfmError> {
        self.positions
            .iter()
            .position(|(l, _)| l == label)
            .map(|i| self.forces[i].as_slice())
            .ok_or_else(|| CcfmError::UnknownPosition(label.to_string()))
    }
}

fn validate_axes(positions: &[MapPosition], velocities: &[f64]) -> Result<(), CcfmError> {
    if positions.is_empty() || velocities.is_empty() {
        return Err(CcfmError::EmptyGrid);
    }
    for p in positions {
        if p.label.contains(',') || p.label.contains('\n') || p.label.contains('\r') {
            return Err(CcfmError::BadLabel(p.label.clone()));
        }
    }
    if velocities.windows(2).any(|w| w[1] <= w[0]) || velocities.iter().any(|v| !v.is_finite()) {
        return Err(CcfmError::NonIncreasingVelocities);
    }
    Ok(())
}

/// Evaluate one map. Reflected-mass cells (model B2, or a simulated
/// source with reflected robot mass) need a joint configuration and a
/// contact direction per position.
pub fn generate_map(
    model: &RobotModel,
    part: &BodyPartParams,
    positions: &[MapPosition],
    velocities: &[f64],
    source: GridSource,
) -> Result<CCFMGrid, CcfmError> {
    validate_axes(positions, velocities)?;

    let mass_spec = match source {
        GridSource::ModelA => EffectiveMassSpec {
            robot_mass_mode: RobotMassMode::IsoSimplified,
            human_mass_mode: HumanMassMode::TsValue,
        },
        GridSource::ModelB1 => EffectiveMassSpec {
            robot_mass_mode: RobotMassMode::IsoSimplified,
            human_mass_mode: HumanMassMode::Infinite,
        },
        GridSource::ModelB2 => EffectiveMassSpec {
            robot_mass_mode: RobotMassMode::Reflected,
            human_mass_mode: HumanMassMode::Infinite,
        },
        GridSource::Simulated(spec) => spec,
        GridSource::MeasuredImport => {
            return Err(CcfmError::Import {
                line: 0,
                message: "measured maps are loaded with import_csv, not generated".into(),
            })
        }
    };

    let mut forces = Vec::with_capacity(positions.len());
    for pos in positions {
        let robot_mass = match mass_spec.robot_mass_mode {
            RobotMassMode::IsoSimplified => {
                iso_robot_mass(model.total_moving_mass(), model.load_mass())?
            }
            RobotMassMode::Reflected => {
                let q = pos
                    .joint_configuration
                    .as_ref()
                    .ok_or_else(|| CcfmError::MissingConfiguration(pos.label.clone()))?;
                let dir = pos
                    .direction
                    .ok_or_else(|| CcfmError::MissingDirection(pos.label.clone()))?;
                let contact = ContactFrame {
                    point: nalgebra::Point3::from(pos.point),
                    direction: dir,
                    attached_link: model
                        .links
                        .last()
                        .expect("validated models have links")
                        .name
                        .clone(),
                };
                reflected_mass(model, q, &contact)?.capped()
            }
        };

        let row: Result<Vec<f64>, CcfmError> = velocities
            .iter()
            .map(|&v| cell_force(&source, robot_mass, part, v, mass_spec.human_mass_mode))
            .collect();
        forces.push(row?);
    }

    Ok(CCFMGrid {
        robot: model.name.clone(),
        body_part: part.name.clone(),
        positions: positions.iter().map(|p| (p.label.clone(), p.point)).collect(),
        velocities: velocities.to_vec(),
        forces,
        source,
    })
}

fn cell_force(
    source: &GridSource,
    robot_mass: f64,
    part: &BodyPartParams,
    velocity: f64,
    human_mode: HumanMassMode,
) -> Result<f64, CcfmError> {
    let human = match human_mode {
        HumanMassMode::TsValue => HumanMass::Finite(part.effective_mass),
        HumanMassMode::Infinite => HumanMass::Infinite,
    };
    match source {
        GridSource::Simulated(_) => {
            let mut cfg = ImpactConfig::undamped(robot_mass, velocity, human, part.stiffness);
            cfg.damping = part.damping;
            let trace = simulate(&cfg)?;
            Ok(trace.samples.iter().map(|s| s.1).fold(0.0, f64::max))
        }
        _ => {
            let mu = effective_mass(robot_mass, human)?;
            Ok(contact_force(velocity, mu, part.stiffness)?)
        }
    }
}

/// Largest grid velocity whose force is at or below `threshold` at the
/// given position; `None` when even the smallest grid velocity exceeds
/// it. No interpolation.
pub fn lookup_max_velocity(
    grid: &CCFMGrid,
    threshold: f64,
    position: &str,
) -> Result<Option<f64>, CcfmError> {
    let row = grid.position_row(position)?;
    Ok(row
        .iter()
        .enumerate()
        .rev()
        .find(|(_, &f)| f <= threshold)
        .map(|(i, _)| grid.velocities[i]))
}

/// CSV form: header row `position` + velocities, one row per position.
/// Numbers are canonical 6-significant-digit values, so an
/// export → import → export cycle is byte-identical.
pub fn export_csv(grid: &CCFMGrid) -> String {
    let mut out = String::new();
    out.push_str("position");
    for v in &grid.velocities {
        out.push(',');
        out.push_str(&sig6(*v));
    }
    out.push('\n');
    for ((label, _), row) in grid.positions.iter().zip(&grid.forces) {
        out.push_str(label);
        for f in row {
            out.push(',');
            out.push_str(&sig6(*f));
        }
        out.push('\n');
    }
    out
}

/// Parse a map in the export CSV form as measured data. Coordinates are
/// not part of the CSV and are set to the origin.
pub fn import_csv(text: &str, robot: &str, body_part: &str) -> Result<CCFMGrid, CcfmError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(CcfmError::Import {
        line: 1,
        message: "empty document".into(),
    })?;
    let mut cells = header.trim_end().split(',');
    if cells.next() != Some("position") {
        return Err(CcfmError::Import {
            line: 1,
            message: "header must start with `position`".into(),
        });
    }
    let velocities: Vec<f64> = cells
        .map(|c| {
            c.trim().parse::<f64>().map_err(|_| CcfmError::Import {
                line: 1,
                message: format!("non-numeric velocity `{c}`"),
            })
        })
        .collect::<Result<_, _>>()?;

    let mut positions = Vec::new();
    let mut forces = Vec::new();
    for (i, line) in lines {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let label = cells.next().unwrap_or_default().to_string();
        let row: Vec<f64> = cells
            .map(|c| {
                c.trim().parse::<f64>().map_err(|_| CcfmError::Import {
                    line: i + 1,
                    message: format!("non-numeric force `{c}`"),
                })
            })
            .collect::<Result<_, _>>()?;
        if row.len() != velocities.len() {
            return Err(CcfmError::Import {
                line: i + 1,
                message: format!("expected {} forces, found {}", velocities.len(), row.len()),
            });
        }
        if row.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(CcfmError::Import {
                line: i + 1,
                message: "forces must be finite and >= 0".into(),
            });
        }
        positions.push((label, Vector3::zeros()));
        forces.push(row);
    }

    if positions.is_empty() || velocities.is_empty() {
        return Err(CcfmError::EmptyGrid);
    }
    if velocities.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CcfmError::NonIncreasingVelocities);
    }

    Ok(CCFMGrid {
        robot: robot.to_string(),
        body_part: body_part.to_string(),
        positions,
        velocities,
        forces,
        source: GridSource::MeasuredImport,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Svg,
}

/// Render the map in the requested format. SVG heatmaps annotate the
/// body part's transient and quasi-static thresholds as iso-lines when
/// the part is supplied.
pub fn export_map(grid: &CCFMGrid, format: ExportFormat, part: Option<&BodyPartParams>) -> String {
    match format {
        ExportFormat::Csv => export_csv(grid),
        ExportFormat::Svg => export_svg(grid, part),
    }
}

// SVG layout constants (px).
const CELL_W: f64 = 36.0;
const CELL_H: f64 = 26.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 46.0;
const MARGIN_RIGHT: f64 = 30.0;

/// Fill color scale: white at zero force to dark navy at the grid max.
fn cell_color(force: f64, max_force: f64) -> String {
    let t = if max_force > 0.0 {
        (force / max_force).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("rgb({},{},{})", lerp(255.0, 13.0), lerp(255.0, 35.0), lerp(255.0, 82.0))
}

/// Static SVG 1.1 heatmap: exactly one `rect` per grid cell, labeled
/// axes, and per-threshold iso-lines interpolated along each row.
pub fn export_svg(grid: &CCFMGrid, part: Option<&BodyPartParams>) -> String {
    let cols = grid.velocities.len();
    let rows = grid.positions.len();
    let width = MARGIN_LEFT + CELL_W * cols as f64 + MARGIN_RIGHT;
    let height = MARGIN_TOP + CELL_H * rows as f64 + MARGIN_BOTTOM;
    let max_force = grid
        .forces
        .iter()
        .flatten()
        .cloned()
        .fold(0.0f64, f64::max);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        sig6(width), sig6(height), sig6(width), sig6(height)
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">{} — {} ({})</text>\n",
        sig6(MARGIN_LEFT),
        xml_escape(&grid.robot),
        xml_escape(&grid.body_part),
        grid.source.tag()
    ));

    for (r, row) in grid.forces.iter().enumerate() {
        for (c, &force) in row.iter().enumerate() {
            let x = MARGIN_LEFT + CELL_W * c as f64;
            let y = MARGIN_TOP + CELL_H * r as f64;
            svg.push_str(&format!(
                "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                sig6(x),
                sig6(y),
                sig6(CELL_W),
                sig6(CELL_H),
                cell_color(force, max_force)
            ));
        }
    }

    for (r, (label, _)) in grid.positions.iter().enumerate() {
        let y = MARGIN_TOP + CELL_H * (r as f64 + 0.65);
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            sig6(MARGIN_LEFT - 8.0),
            sig6(y),
            xml_escape(label)
        ));
    }
    let label_stride = (cols / 12).max(1);
    for (c, v) in grid.velocities.iter().enumerate() {
        if c % label_stride != 0 && c != cols - 1 {
            continue;
        }
        let x = MARGIN_LEFT + CELL_W * (c as f64 + 0.5);
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
            sig6(x),
            sig6(MARGIN_TOP + CELL_H * rows as f64 + 16.0),
            sig6(*v)
        ));
    }
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">velocity [m/s]</text>\n",
        sig6(MARGIN_LEFT + CELL_W * cols as f64 / 2.0),
        sig6(MARGIN_TOP + CELL_H * rows as f64 + 34.0)
    ));

    if let Some(part) = part {
        for (threshold, color, name) in [
            (part.transient_force_limit, "#d62728", "transient"),
            (part.quasistatic_force_limit, "#ff7f0e", "quasi-static"),
        ] {
            if let Some(d) = iso_line_path(grid, threshold) {
                svg.push_str(&format!(
                    "  <path d=\"{d}\" stroke=\"{color}\" stroke-width=\"2\" fill=\"none\"/>\n"
                ));
                svg.push_str(&format!(
                    "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" fill=\"{color}\">{name} {} N</text>\n",
                    sig6(MARGIN_LEFT),
                    sig6(MARGIN_TOP - 8.0 - if name == "transient" { 12.0 } else { 0.0 }),
                    sig6(threshold)
                ));
            }
        }
    }

    svg.push_str("</svg>\n");
    svg
}

/// Per-row vertical segments at the velocity where the row crosses the
/// threshold (linear interpolation between grid columns); `None` when no
/// row reaches the threshold.
fn iso_line_path(grid: &CCFMGrid, threshold: f64) -> Option<String> {
    let mut d = String::new();
    for (r, row) in grid.forces.iter().enumerate() {
        let Some(x) = row_crossing_x(row, threshold) else {
            continue;
        };
        let y0 = MARGIN_TOP + CELL_H * r as f64;
        let y1 = y0 + CELL_H;
        d.push_str(&format!("M {} {} L {} {} ", sig6(x), sig6(y0), sig6(x), sig6(y1)));
    }
    if d.is_empty() {
        None
    } else {
        Some(d.trim_end().to_string())
    }
}

fn row_crossing_x(row: &[f64], threshold: f64) -> Option<f64> {
    let col_x = |c: f64| MARGIN_LEFT + CELL_W * (c + 0.5);
    if row[0] > threshold {
        return Some(MARGIN_LEFT);
    }
    for c in 1..row.len() {
        if row[c] > threshold {
            let f0 = row[c - 1];
            let f1 = row[c];
            let t = if f1 > f0 { (threshold - f0) / (f1 - f0) } else { 0.0 };
            return Some(col_x(c as f64 - 1.0 + t));
        }
    }
    None
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
