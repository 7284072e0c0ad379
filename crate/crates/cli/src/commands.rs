//! Subcommand implementations. Output is deterministic: identical argv
//! and input files produce byte-identical stdout.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use nalgebra::{Point3, Unit};
use serde::Deserialize;

use pfl_core::ccfm::{
    export_csv, export_svg, generate_map, import_csv, lookup_max_velocity, CCFMGrid, GridSource,
    MapPosition,
};
use pfl_core::contact_model::{
    contact_force, iso_robot_mass, velocity_limit, EffectiveMassSpec, HumanMass, HumanMassMode,
    RobotMassMode,
};
use pfl_core::cost::{cost_per_configuration, cost_total_from_per_config, CostParams};
use pfl_core::dynamics::{reflected_mass, ContactFrame, ReflectedMass};
use pfl_core::impact_sim::{simulate as run_simulation, ImpactConfig, DEFAULT_DT};
use pfl_core::numfmt::{round_sig6, sig6};
use pfl_core::risk_engine::{
    assess as run_assessment, Configuration, ContactScenario, EventType, ForcePhase, Geometry,
    InjuryMeasure, Interpretation, InterpretationId, ScenarioDoc, Verdict,
};
use pfl_core::robot_model::JointConfiguration;
use pfl_core::trace::{
    evaluate_trace, parse_trace, trace_to_csv, TraceSource, DEFAULT_PHASE_BOUNDARY,
};

use crate::inputs::*;
use crate::{EXIT_NOT_SAFE, EXIT_OK};

fn print_json(value: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("JSON output")
    );
}

// ---------------------------------------------------------------- assess

#[derive(Args)]
pub struct AssessArgs {
    /// Scenario file (JSON).
    #[arg(long, required_unless_present = "interactive")]
    scenario: Option<PathBuf>,
    /// Robot description; overrides the scenario's `robot` path.
    #[arg(long)]
    robot: Option<PathBuf>,
    /// Walk the assessment questions interactively instead of reading a
    /// scenario file (prompts go to stderr, the report to stdout).
    #[arg(long)]
    interactive: bool,
    #[arg(long)]
    json: bool,
}

pub fn assess(args: AssessArgs) -> Result<i32> {
    let parts = body_part_table()?;

    let (scenario, interp_id, robot_path) = if args.interactive {
        let (s, id) = interactive_scenario(&parts)?;
        (s, id, None)
    } else {
        let path = args.scenario.as_ref().expect("clap enforces the flag");
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario `{}`", path.display()))?;
        let doc = ScenarioDoc::parse(&text)?;
        let (s, id) = doc.to_scenario()?;
        (s, id, doc.robot.map(PathBuf::from))
    };

    let robot_path = args
        .robot
        .or(robot_path)
        .context("no robot description: set `robot` in the scenario or pass --robot")?;
    let model = load_robot(&robot_path)?;

    let interp = Interpretation::for_id(interp_id);
    let report = run_assessment(&model, &scenario, &interp, &parts)?;

    if args.json {
        print_json(&report.to_json());
    } else {
        print!("{}", report.render_text());
    }
    Ok(if report.verdict == Verdict::Safe {
        EXIT_OK
    } else {
        EXIT_NOT_SAFE
    })
}

fn prompt(question: &str) -> Result<String> {
    eprint!("{question}: ");
    std::io::stderr().flush().ok();
    let mut line = String::new();
    std::io::stdin()
        .lock()
        .read_line(&mut line)
        .context("reading answer")?;
    let trimmed = line.trim().to_ascii_lowercase();
    if trimmed.is_empty() {
        bail!("empty answer for `{question}`");
    }
    Ok(trimmed)
}

fn interactive_scenario(
    parts: &pfl_core::BodyPartTable,
) -> Result<(ContactScenario, InterpretationId)> {
    let event_type = match prompt("contact event type [constrained/unconstrained]")?.as_str() {
        s if s.starts_with('c') => EventType::Constrained,
        s if s.starts_with('u') => EventType::Unconstrained,
        other => bail!("unrecognized event type `{other}`"),
    };
    let force_phase = match prompt("contact force phase [dynamic/quasistatic]")?.as_str() {
        "dynamic" | "phase i" | "phase_i" | "i" | "1" => ForcePhase::PhaseI,
        "quasistatic" | "quasi-static" | "phase ii" | "phase_ii" | "ii" | "2" => ForcePhase::PhaseII,
        s if s.starts_with('d') => ForcePhase::PhaseI,
        s if s.starts_with('q') => ForcePhase::PhaseII,
        other => bail!("unrecognized force phase `{other}`"),
    };
    let configuration = if event_type == EventType::Constrained && force_phase == ForcePhase::PhaseII
    {
        match prompt("robot configuration [non-singular/near-singular]")?.as_str() {
            s if s.starts_with("non") => Configuration::NonSingular,
            s if s.starts_with("near") => Configuration::NearSingular,
            other => bail!("unrecognized configuration `{other}`"),
        }
    } else {
        Configuration::NonSingular
    };
    let geometry = match prompt("contact geometry [blunt/sharp]")?.as_str() {
        s if s.starts_with('b') => Geometry::Blunt,
        s if s.starts_with('s') => Geometry::Sharp,
        other => bail!("unrecognized geometry `{other}`"),
    };
    let body_part = prompt("body part [hand/back/…]")?;
    parts.get(&body_part)?;
    let interp: InterpretationId = prompt("interpretation [A/B1/B2/C/D]")?
        .parse()
        .map_err(|e: String| anyhow::anyhow!(e))?;
    let velocity = if Interpretation::for_id(interp).mass_spec.is_some() {
        Some(
            prompt("relative velocity at contact [m/s]")?
                .parse::<f64>()
                .context("velocity must be a number")?,
        )
    } else {
        None
    };
    Ok((
        ContactScenario {
            event_type,
            force_phase,
            geometry,
            configuration,
            injury_measure: InjuryMeasure::ForcePressure,
            body_part,
            contact: None,
            joint_configuration: None,
            velocity,
            position_label: None,
        },
        interp,
    ))
}

// ---------------------------------------------------- predict / invert

#[derive(Args)]
pub struct PredictForceArgs {
    /// Relative velocity at contact [m/s].
    #[arg(long)]
    v_rel: f64,
    /// Effective mass [kg]; alternative to --m-r/--m-h.
    #[arg(long)]
    mu: Option<f64>,
    /// Robot-side mass [kg].
    #[arg(long)]
    m_r: Option<f64>,
    /// Human-side mass [kg] or `inf` for a constrained body part.
    #[arg(long)]
    m_h: Option<HumanMassArg>,
    /// Contact stiffness [N/mm].
    #[arg(long)]
    k_nmm: Option<f64>,
    /// Body part supplying stiffness (and human mass if --m-h is absent).
    #[arg(long)]
    part: Option<String>,
    #[arg(long)]
    json: bool,
}

pub fn predict_force(args: PredictForceArgs) -> Result<i32> {
    let table = body_part_table()?;
    let part = args.part.as_deref().map(|p| table.get(p)).transpose()?;
    let mu = resolve_mu(args.mu, args.m_r, args.m_h, part)?;
    let k = resolve_stiffness(args.k_nmm, part)?;
    let force = contact_force(args.v_rel, mu, k)?;
    if args.json {
        print_json(&serde_json::json!({
            "force_n": round_sig6(force),
            "mu_kg": round_sig6(mu),
            "stiffness_n_per_m": round_sig6(k),
        }));
    } else {
        println!("{} N", sig6(force));
    }
    Ok(EXIT_OK)
}

#[derive(Args)]
pub struct LimitVelocityArgs {
    /// Force threshold [N]; defaults to the part's limit when --part is given.
    #[arg(long)]
    f_max: Option<f64>,
    /// Which of the part's limits applies when --f-max is absent.
    #[arg(long, value_parser = ["transient", "quasistatic"], default_value = "transient")]
    threshold: String,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    m_r: Option<f64>,
    /// Human-side mass [kg] or `inf`.
    #[arg(long)]
    m_h: Option<HumanMassArg>,
    #[arg(long)]
    k_nmm: Option<f64>,
    #[arg(long)]
    part: Option<String>,
    #[arg(long)]
    json: bool,
}

pub fn limit_velocity(args: LimitVelocityArgs) -> Result<i32> {
    let table = body_part_table()?;
    let part = args.part.as_deref().map(|p| table.get(p)).transpose()?;
    let f_max = match (args.f_max, part) {
        (Some(f), _) => f,
        (None, Some(p)) => match args.threshold.as_str() {
            "quasistatic" => p.quasistatic_force_limit,
            _ => p.transient_force_limit,
        },
        (None, None) => bail!("need --f-max or --part to fix the threshold"),
    };
    let mu = resolve_mu(args.mu, args.m_r, args.m_h, part)?;
    let k = resolve_stiffness(args.k_nmm, part)?;
    let v = velocity_limit(f_max, mu, k)?;
    if args.json {
        print_json(&serde_json::json!({
            "velocity_m_per_s": round_sig6(v),
            "f_max_n": round_sig6(f_max),
            "mu_kg": round_sig6(mu),
        }));
    } else {
        println!("{} m/s", sig6(v));
    }
    Ok(EXIT_OK)
}

// ------------------------------------------------------------ analyze

#[derive(Args)]
pub struct AnalyzeTraceArgs {
    /// Trace CSV (`time_s,force_N`).
    #[arg(long)]
    trace: PathBuf,
    /// Body part whose limits apply.
    #[arg(long)]
    part: String,
    /// Split between the dynamic and quasi-static phases [s].
    #[arg(long, default_value_t = DEFAULT_PHASE_BOUNDARY)]
    phase_boundary: f64,
    #[arg(long)]
    json: bool,
}

pub fn analyze_trace(args: AnalyzeTraceArgs) -> Result<i32> {
    let table = body_part_table()?;
    let part = table.get(&args.part)?;
    let text = std::fs::read_to_string(&args.trace)
        .with_context(|| format!("reading trace `{}`", args.trace.display()))?;
    let trace = parse_trace(&text, TraceSource::Measured)?;
    let verdict = evaluate_trace(&trace, part, args.phase_boundary);

    let all_pass = verdict.transient_pass && verdict.quasistatic_pass != Some(false);
    if args.json {
        print_json(&serde_json::json!({
            "peak_force_n": round_sig6(verdict.peak_force),
            "peak_time_s": round_sig6(verdict.peak_time),
            "quasistatic_force_n": verdict.quasistatic_force.map(round_sig6),
            "phase_boundary_s": round_sig6(verdict.phase_boundary),
            "transient_pass": verdict.transient_pass,
            "quasistatic_pass": verdict.quasistatic_pass,
            "pass": all_pass,
        }));
    } else {
        println!(
            "peak force:         {} N at {} s",
            sig6(verdict.peak_force),
            sig6(verdict.peak_time)
        );
        println!(
            "transient check:    {} (limit {} N)",
            if verdict.transient_pass { "pass" } else { "FAIL" },
            sig6(part.transient_force_limit)
        );
        match verdict.quasistatic_force {
            Some(f) => {
                println!("quasi-static force: {} N", sig6(f));
                println!(
                    "quasi-static check: {} (limit {} N)",
                    if verdict.quasistatic_pass == Some(true) { "pass" } else { "FAIL" },
                    sig6(part.quasistatic_force_limit)
                );
            }
            None => {
                println!("quasi-static force: none (contact ended before the boundary)");
                println!("quasi-static check: n/a");
            }
        }
        println!("result:             {}", if all_pass { "pass" } else { "FAIL" });
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_NOT_SAFE })
}

// ----------------------------------------------------------- simulate

#[derive(Args)]
pub struct SimulateArgs {
    /// Robot-side mass [kg].
    #[arg(long)]
    robot_mass: f64,
    /// Approach velocity [m/s].
    #[arg(long)]
    velocity: f64,
    /// Human-side mass [kg] or `inf`; defaults to the part's mass, or
    /// `inf` with --constrained.
    #[arg(long, conflicts_with = "constrained")]
    human_mass: Option<HumanMassArg>,
    /// Constrained body part (infinite human-side mass).
    #[arg(long)]
    constrained: bool,
    /// Body part supplying stiffness/mass/damping defaults.
    #[arg(long)]
    part: Option<String>,
    /// Contact stiffness [N/mm].
    #[arg(long)]
    k_nmm: Option<f64>,
    /// Contact damping [N·s/m].
    #[arg(long)]
    damping: Option<f64>,
    /// Contact force that triggers the reaction [N].
    #[arg(long)]
    detection_force: Option<f64>,
    /// Delay between detection and the reaction [s].
    #[arg(long, default_value_t = 0.0)]
    reaction_delay: f64,
    /// Commanded retreat speed after the reaction [m/s]; 0 stops and holds.
    #[arg(long, default_value_t = 0.0)]
    retraction_velocity: f64,
    /// Simulated time [s]; defaults to covering the first contact.
    #[arg(long)]
    duration: Option<f64>,
    /// Integration step [s].
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Write the trace CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

pub fn simulate(args: SimulateArgs) -> Result<i32> {
    let table = body_part_table()?;
    let part = args.part.as_deref().map(|p| table.get(p)).transpose()?;
    let human_mass = if args.constrained {
        HumanMass::Infinite
    } else {
        match (args.human_mass, part) {
            (Some(h), _) => h.0,
            (None, Some(p)) => HumanMass::Finite(p.effective_mass),
            (None, None) => bail!("need --human-mass, --constrained, or --part"),
        }
    };
    let stiffness = resolve_stiffness(args.k_nmm, part)?;
    let damping = args.damping.or(part.map(|p| p.damping)).unwrap_or(0.0);

    let mut cfg = ImpactConfig::undamped(args.robot_mass, args.velocity, human_mass, stiffness);
    cfg.damping = damping;
    cfg.detection_force = args.detection_force;
    cfg.reaction_delay = args.reaction_delay;
    cfg.retraction_velocity = args.retraction_velocity;
    cfg.dt = args.dt;
    cfg.duration = args.duration.unwrap_or_else(|| cfg.suggested_duration());

    let trace = run_simulation(&cfg)?;
    let peak = trace.samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let csv = trace_to_csv(&trace);
    emit(args.out.as_deref(), &csv)?;

    if args.json {
        print_json(&serde_json::json!({
            "out": args.out.as_ref().map(|p| p.display().to_string()),
            "samples": trace.samples.len(),
            "peak_force_n": round_sig6(peak),
            "duration_s": round_sig6(cfg.duration),
        }));
    } else if args.out.is_some() {
        println!(
            "wrote {} ({} samples, peak {} N)",
            args.out.as_ref().unwrap().display(),
            trace.samples.len(),
            sig6(peak)
        );
    }
    Ok(EXIT_OK)
}

// --------------------------------------------------------------- ccfm

#[derive(Args)]
pub struct CcfmArgs {
    /// Robot description (needed for model/simulated sources).
    #[arg(long)]
    robot: Option<PathBuf>,
    /// Body part whose stiffness and thresholds apply.
    #[arg(long)]
    body_part: String,
    /// Comma-separated labels from the robot's reference positions.
    #[arg(long, default_value = "C,N")]
    positions: String,
    #[arg(long, default_value_t = 0.05)]
    vmin: f64,
    #[arg(long, default_value_t = 1.5)]
    vmax: f64,
    #[arg(long, default_value_t = 0.05)]
    vstep: f64,
    /// Cell source: model-a, model-b1, model-b2, simulated, measured.
    #[arg(long, default_value = "model-b1")]
    source: String,
    /// Measured map CSV to import (with --source measured).
    #[arg(long)]
    import: Option<PathBuf>,
    /// Per-position joint configurations and contact directions (JSON),
    /// required for reflected-mass cells.
    #[arg(long)]
    configs: Option<PathBuf>,
    /// Robot-mass binding for simulated cells.
    #[arg(long, value_parser = ["iso", "reflected"], default_value = "iso")]
    sim_robot_mass: String,
    /// Human-mass binding for simulated cells.
    #[arg(long, value_parser = ["part", "infinite"], default_value = "infinite")]
    sim_human_mass: String,
    /// Write the map CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write an SVG heatmap here.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Report, per position, the largest mapped velocity whose force
    /// stays at or below this threshold [N].
    #[arg(long)]
    lookup: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PositionConfigDoc {
    joint_configuration: Vec<f64>,
    direction: [f64; 3],
}

pub fn ccfm(args: CcfmArgs) -> Result<i32> {
    let table = body_part_table()?;
    let part = table.get(&args.body_part)?.clone();

    let grid: CCFMGrid = if args.source == "measured" {
        let path = args
            .import
            .as_ref()
            .context("--source measured needs --import <csv>")?;
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading `{}`", path.display()))?;
        let robot_name = args
            .robot
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "measured".into());
        import_csv(&text, &robot_name, &part.name)?
    } else {
        let robot_path = args.robot.as_ref().context("this source needs --robot")?;
        let model = load_robot(robot_path)?;

        let configs: BTreeMap<String, PositionConfigDoc> = match &args.configs {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading `{}`", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing `{}`", path.display()))?
            }
            None => BTreeMap::new(),
        };

        let mut positions = Vec::new();
        for label in args.positions.split(',').map(str::trim) {
            let point = model
                .reference_position(label)
                .with_context(|| format!("robot has no reference position `{label}`"))?;
            let mut pos = MapPosition::new(label, point);
            if let Some(doc) = configs.get(label) {
                pos.joint_configuration =
                    Some(JointConfiguration::new(doc.joint_configuration.clone()));
                let dir = nalgebra::Vector3::new(doc.direction[0], doc.direction[1], doc.direction[2]);
                pos.direction = Some(Unit::new_normalize(dir));
            }
            positions.push(pos);
        }

        if !args.vstep.is_finite() || args.vstep <= 0.0 || args.vmax < args.vmin {
            bail!("need vmin <= vmax and vstep > 0");
        }
        let n = ((args.vmax - args.vmin) / args.vstep).round() as usize;
        let velocities: Vec<f64> = (0..=n).map(|i| args.vmin + i as f64 * args.vstep).collect();

        let source = match args.source.as_str() {
            "model-a" => GridSource::ModelA,
            "model-b1" => GridSource::ModelB1,
            "model-b2" => GridSource::ModelB2,
            "simulated" => GridSource::Simulated(EffectiveMassSpec {
                robot_mass_mode: match args.sim_robot_mass.as_str() {
                    "reflected" => RobotMassMode::Reflected,
                    _ => RobotMassMode::IsoSimplified,
                },
                human_mass_mode: match args.sim_human_mass.as_str() {
                    "part" => HumanMassMode::TsValue,
                    _ => HumanMassMode::Infinite,
                },
            }),
            other => bail!("unknown source `{other}`"),
        };
        generate_map(&model, &part, &positions, &velocities, source)?
    };

    if let Some(path) = &args.out {
        std::fs::write(path, export_csv(&grid))
            .with_context(|| format!("writing `{}`", path.display()))?;
    }
    if let Some(path) = &args.svg {
        std::fs::write(path, export_svg(&grid, Some(&part)))
            .with_context(|| format!("writing `{}`", path.display()))?;
    }

    let mut lookups = Vec::new();
    if let Some(threshold) = args.lookup {
        for (label, _) in &grid.positions {
            lookups.push((label.clone(), lookup_max_velocity(&grid, threshold, label)?));
        }
    }

    if args.json {
        let lookup_json: serde_json::Map<String, serde_json::Value> = lookups
            .iter()
            .map(|(label, v)| {
                (
                    label.clone(),
                    v.map(round_sig6)
                        .map(serde_json::Value::from)
                        .unwrap_or(serde_json::Value::Null),
                )
            })
            .collect();
        print_json(&serde_json::json!({
            "robot": grid.robot,
            "body_part": grid.body_part,
            "source": grid.source.tag(),
            "positions": grid.positions.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>(),
            "velocities": grid.velocities.iter().map(|v| round_sig6(*v)).collect::<Vec<_>>(),
            "out": args.out.as_ref().map(|p| p.display().to_string()),
            "svg": args.svg.as_ref().map(|p| p.display().to_string()),
            "max_velocity_at_threshold": lookup_json,
        }));
    } else {
        println!(
            "map: {} positions x {} velocities ({}, {})",
            grid.positions.len(),
            grid.velocities.len(),
            grid.source.tag(),
            grid.body_part
        );
        if let Some(path) = &args.out {
            println!("wrote {}", path.display());
        }
        if let Some(path) = &args.svg {
            println!("wrote {}", path.display());
        }
        if let Some(threshold) = args.lookup {
            for (label, v) in &lookups {
                match v {
                    Some(v) => println!(
                        "max velocity at {} N, position {}: {} m/s",
                        sig6(threshold),
                        label,
                        sig6(*v)
                    ),
                    None => println!(
                        "max velocity at {} N, position {}: none (every mapped velocity exceeds it)",
                        sig6(threshold),
                        label
                    ),
                }
            }
        }
    }
    Ok(EXIT_OK)
}

// --------------------------------------------------------------- cost

#[derive(Args)]
pub struct CostArgs {
    #[arg(long, default_value_t = 1)]
    positions: u32,
    #[arg(long, default_value_t = 1)]
    parts: u32,
    /// Setup time per configuration [h].
    #[arg(long, default_value_t = 0.5)]
    setup: f64,
    /// One speed adjustment [h].
    #[arg(long, default_value_t = 0.05)]
    adjust: f64,
    /// One experiment repeat [h].
    #[arg(long, default_value_t = 0.02)]
    repeat: f64,
    #[arg(long, default_value_t = 3)]
    repeats: u32,
    #[arg(long, default_value_t = 6)]
    trials: u32,
    /// Override the computed per-configuration time [h].
    #[arg(long)]
    per_config: Option<f64>,
    #[arg(long)]
    json: bool,
}

pub fn cost(args: CostArgs) -> Result<i32> {
    if args.positions < 1 || args.parts < 1 {
        bail!("--positions and --parts must be >= 1");
    }
    let params = CostParams {
        setup_h: args.setup,
        adjust_h: args.adjust,
        repeat_h: args.repeat,
        repeats: args.repeats,
        trials: args.trials,
    };
    params.validate()?;
    let per_config = args
        .per_config
        .unwrap_or_else(|| cost_per_configuration(&params));
    if !per_config.is_finite() || per_config < 0.0 {
        bail!("--per-config must be >= 0");
    }
    let total = cost_total_from_per_config(per_config, args.positions, args.parts);

    if args.json {
        print_json(&serde_json::json!({
            "per_configuration_h": (per_config * 100.0).round() / 100.0,
            "positions": args.positions,
            "body_parts": args.parts,
            "total_h": (total * 100.0).round() / 100.0,
        }));
    } else {
        println!("cost per configuration: {per_config:.2} h");
        println!(
            "total ({} positions x {} body parts): {total:.2} h",
            args.positions, args.parts
        );
    }
    Ok(EXIT_OK)
}

// --------------------------------------------------------- robot-info

#[derive(Args)]
pub struct RobotInfoArgs {
    #[arg(long)]
    robot: PathBuf,
    /// Joint configuration, comma-separated (enables reflected mass).
    #[arg(long)]
    q: Option<String>,
    /// Link the contact point is attached to.
    #[arg(long, requires_all = ["q", "point", "direction"])]
    link: Option<String>,
    /// Contact point, base frame [m], `x,y,z`.
    #[arg(long)]
    point: Option<String>,
    /// Impact direction, `x,y,z` (normalized).
    #[arg(long)]
    direction: Option<String>,
    #[arg(long)]
    json: bool,
}

pub fn robot_info(args: RobotInfoArgs) -> Result<i32> {
    let model = load_robot(&args.robot)?;
    let total = model.total_moving_mass();
    let m_r = iso_robot_mass(total, model.load_mass())?;

    let reflected = match (&args.q, &args.link, &args.point, &args.direction) {
        (Some(q), Some(link), Some(point), Some(direction)) => {
            let q = JointConfiguration::new(parse_f64_list(q)?);
            let contact = ContactFrame::new(
                Point3::from(parse_vec3(point)?),
                parse_vec3(direction)?,
                link.clone(),
            )?;
            Some(reflected_mass(&model, &q, &contact)?)
        }
        (None, None, None, None) => None,
        _ => bail!("reflected mass needs --q, --link, --point, and --direction together"),
    };

    if args.json {
        let reflected_json = match reflected {
            Some(ReflectedMass::Finite(m)) => serde_json::Value::from(round_sig6(m)),
            Some(ReflectedMass::Unbounded) => serde_json::Value::String("unbounded".into()),
            None => serde_json::Value::Null,
        };
        print_json(&serde_json::json!({
            "name": model.name,
            "links": model.links.len(),
            "dof": model.dof(),
            "total_moving_mass_kg": round_sig6(total),
            "load_mass_kg": round_sig6(model.load_mass()),
            "simplified_robot_mass_kg": round_sig6(m_r),
            "reference_positions_m": model.reference_positions.iter()
                .map(|(k, v)| (k.clone(), vec![v.x, v.y, v.z]))
                .collect::<BTreeMap<_, _>>(),
            "reflected_mass_kg": reflected_json,
        }));
    } else {
        println!("robot:                 {}", model.name);
        println!(
            "links:                 {} ({} moving)",
            model.links.len(),
            model.dof()
        );
        println!("dof:                   {}", model.dof());
        println!("total moving mass:     {} kg", sig6(total));
        println!("load (payload+adapter): {} kg", sig6(model.load_mass()));
        println!("simplified robot mass: {} kg", sig6(m_r));
        if !model.reference_positions.is_empty() {
            println!("reference positions:");
            for (label, p) in &model.reference_positions {
                println!("  {}: [{}, {}, {}] m", label, sig6(p.x), sig6(p.y), sig6(p.z));
            }
        }
        if let Some(r) = reflected {
            match r {
                ReflectedMass::Finite(m) => println!("reflected mass:        {} kg", sig6(m)),
                ReflectedMass::Unbounded => println!("reflected mass:        unbounded"),
            }
        }
    }
    Ok(EXIT_OK)
}
