//! `pfl` — contact-safety assessment for power-and-force-limited robot
//! cells, scriptable enough to sit in a CI gate.
//!
//! Exit codes: 0 success / assessment passed, 1 assessment failed
//! (not safe, threshold exceeded), 2 usage or input error.

// Flag doc comments double as clap help text; bracketed unit notes there
// are not doc links.
#![allow(rustdoc::broken_intra_doc_links)]

mod commands;
mod inputs;

use clap::{Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_SAFE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "pfl",
    version,
    about = "Contact-safety assessment for collaborative robot cells",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assess a contact scenario file against a force threshold.
    Assess(commands::AssessArgs),
    /// Predict the peak contact force for a velocity and mass pairing.
    PredictForce(commands::PredictForceArgs),
    /// Invert a force threshold into a velocity limit.
    LimitVelocity(commands::LimitVelocityArgs),
    /// Evaluate a force-time CSV trace against body-part limits.
    AnalyzeTrace(commands::AnalyzeTraceArgs),
    /// Generate a synthetic collision trace.
    Simulate(commands::SimulateArgs),
    /// Build, export, and query collision force maps.
    Ccfm(commands::CcfmArgs),
    /// Estimate the wall-clock cost of experimental validation.
    Cost(commands::CostArgs),
    /// Summarize a robot description (masses, DOF, reflected mass).
    RobotInfo(commands::RobotInfoArgs),
}

fn main() {
    // Die silently on a closed pipe (e.g. `pfl simulate | head`) like
    // other stream-friendly tools instead of panicking mid-write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Assess(args) => commands::assess(args),
        Command::PredictForce(args) => commands::predict_force(args),
        Command::LimitVelocity(args) => commands::limit_velocity(args),
        Command::AnalyzeTrace(args) => commands::analyze_trace(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Ccfm(args) => commands::ccfm(args),
        Command::Cost(args) => commands::cost(args),
        Command::RobotInfo(args) => commands::robot_info(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(EXIT_USAGE);
        }
    }
}
