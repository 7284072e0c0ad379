//! Shared flag parsing and file loading for the subcommands.

use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use nalgebra::Vector3;
use pfl_core::contact_model::{parse_body_parts, BodyPartParams, BodyPartTable, HumanMass};
use pfl_core::robot_model::{parse_robot, RobotModel};

/// Environment variable naming an extra body-part data file.
pub const BODY_PARTS_ENV: &str = "PFL_BODY_PARTS";

/// Built-in body parts, extended by the data file named in
/// `PFL_BODY_PARTS` when set.
pub fn body_part_table() -> Result<BodyPartTable> {
    let mut table = BodyPartTable::builtin();
    if let Ok(path) = std::env::var(BODY_PARTS_ENV) {
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading body-part file `{path}`"))?;
        table.extend(parse_body_parts(&text).with_context(|| format!("parsing `{path}`"))?);
    }
    Ok(table)
}

pub fn load_robot(path: &Path) -> Result<RobotModel> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading robot description `{}`", path.display()))?;
    parse_robot(&text).with_context(|| format!("parsing `{}`", path.display()))
}

/// A mass flag accepting a number or `inf` for a constrained body part.
#[derive(Debug, Clone, Copy)]
pub struct HumanMassArg(pub HumanMass);

impl FromStr for HumanMassArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        if t == "inf" || t == "infinite" {
            return Ok(Self(HumanMass::Infinite));
        }
        let v: f64 = t
            .parse()
            .map_err(|_| format!("expected a mass in kg or `inf`, got `{s}`"))?;
        if !v.is_finite() || v <= 0.0 {
            return Err("mass must be positive".into());
        }
        Ok(Self(HumanMass::Finite(v)))
    }
}

/// Resolve an effective mass from `--mu`, or from `--m-r` with a human
/// side (`--m-h`, or the part's mass when a part is given).
pub fn resolve_mu(
    mu: Option<f64>,
    m_r: Option<f64>,
    m_h: Option<HumanMassArg>,
    part: Option<&BodyPartParams>,
) -> Result<f64> {
    if let Some(mu) = mu {
        if m_r.is_some() || m_h.is_some() {
            bail!("--mu conflicts with --m-r/--m-h");
        }
        if !mu.is_finite() || mu <= 0.0 {
            bail!("--mu must be positive");
        }
        return Ok(mu);
    }
    let m_r = m_r.context("need --mu, or --m-r with a human mass")?;
    let human = match (m_h, part) {
        (Some(h), _) => h.0,
        (None, Some(p)) => HumanMass::Finite(p.effective_mass),
        (None, None) => bail!("need --m-h (a mass or `inf`) or --part to fix the human side"),
    };
    Ok(pfl_core::contact_model::effective_mass(m_r, human)?)
}

/// Stiffness from `--k-nmm` (N/mm) or the part table.
pub fn resolve_stiffness(k_nmm: Option<f64>, part: Option<&BodyPartParams>) -> Result<f64> {
    match (k_nmm, part) {
        (Some(k), _) => {
            if !k.is_finite() || k <= 0.0 {
                bail!("--k-nmm must be positive");
            }
            Ok(k * 1000.0)
        }
        (None, Some(p)) => Ok(p.stiffness),
        (None, None) => bail!("need --k-nmm or --part to fix the stiffness"),
    }
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .with_context(|| format!("non-numeric value `{c}`"))
        })
        .collect()
}

pub fn parse_vec3(text: &str) -> Result<Vector3<f64>> {
    let v = parse_f64_list(text)?;
    if v.len() != 3 {
        bail!("expected 3 comma-separated values, got {}", v.len());
    }
    Ok(Vector3::new(v[0], v[1], v[2]))
}

/// Write to the path, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)
            .with_context(|| format!("writing `{}`", p.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}
