//! Command-line front end of the mission planner.
//!
//! Exit codes: 0 success, 2 parse/validation error, 3 infeasible scenario,
//! 4 solver failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use wpcn_core::hover::{solve_fd, solve_hd, DuplexMode};
use wpcn_core::kinematics::KinematicLimits;
use wpcn_core::planner::{
    emit_plan, emit_sweep, order_energy_matrix, plan_mission, PlanFormat, PlannerContext,
    SweepAxis,
};
use wpcn_core::propulsion::derive_constants;
use wpcn_core::sca::{optimize_straight, ScaSettings};
use wpcn_core::scenario::Scenario;
use wpcn_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "wpcn", version, about = "Energy-minimizing mission planner for a UAV that charges ground users and collects their data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a full mission for a scenario file.
    Plan(PlanArgs),
    /// Compute the visiting order only.
    Order(OrderArgs),
    /// Solve the hover phase for one user at a fixed height.
    Hover(HoverArgs),
    /// Refine a straight rest-to-rest leg of a given length.
    Trajectory(TrajectoryArgs),
    /// Sweep a scenario parameter and tabulate mission energies.
    Sweep(SweepArgs),
    /// Parse and validate a scenario file.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct PlanArgs {
    /// Scenario file (TOML).
    scenario: PathBuf,
    /// Override the scenario's duplexing mode.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<DuplexMode>,
    /// Write the plan as CSV to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OrderArgs {
    /// Scenario file (TOML).
    scenario: PathBuf,
    /// Cross-check the dual method against exhaustive search.
    #[arg(long)]
    exhaustive: bool,
    /// Write the dual iteration trace as CSV to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct HoverArgs {
    /// Scenario file (TOML).
    scenario: PathBuf,
    /// 1-based user index.
    #[arg(long)]
    user: usize,
    /// Hover height, m.
    #[arg(long)]
    height: f64,
}

#[derive(Args)]
struct TrajectoryArgs {
    /// Leg length, m.
    #[arg(long)]
    distance: f64,
    /// Write the refinement trace as CSV to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario file (TOML).
    scenario: PathBuf,
    /// Swept parameter: H (altitude, m), D (demand, bits), B (bandwidth,
    /// Hz) or P (broadcast power, W).
    #[arg(long)]
    axis: SweepAxis,
    /// Sweep points (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Modes to evaluate (comma separated: hd, fd). Defaults to the
    /// scenario's mode.
    #[arg(long, value_delimiter = ',', value_parser = parse_mode)]
    modes: Vec<DuplexMode>,
    /// Write the table as CSV to this path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Scenario file (TOML).
    scenario: PathBuf,
}

fn parse_mode(s: &str) -> Result<DuplexMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "hd" => Ok(DuplexMode::Hd),
        "fd" => Ok(DuplexMode::Fd),
        other => Err(format!("unknown mode `{other}` (expected hd or fd)")),
    }
}

fn load_scenario(path: &PathBuf) -> anyhow::Result<Scenario> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading scenario `{}`", path.display()))?;
    Ok(Scenario::parse(&text)?)
}

fn print_warnings(scenario: &Scenario) {
    for warning in scenario.warnings() {
        eprintln!("warning: {warning}");
    }
}

fn run() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Plan(args) => {
            let mut scenario = load_scenario(&args.scenario)?;
            if let Some(mode) = args.mode {
                scenario.mode = mode;
            }
            print_warnings(&scenario);
            let plan = plan_mission(&scenario)?;
            print!("{}", emit_plan(&plan, PlanFormat::Human));
            if let Some(out) = args.out {
                fs::write(&out, emit_plan(&plan, PlanFormat::Csv))
                    .with_context(|| format!("writing `{}`", out.display()))?;
                println!("plan csv written to {}", out.display());
            }
        }
        Command::Order(args) => {
            let scenario = load_scenario(&args.scenario)?;
            print_warnings(&scenario);
            let mut ctx = PlannerContext::new(&scenario)?;
            let matrix = order_energy_matrix(&scenario, &mut ctx)?;
            let (order, trace) =
                wpcn_core::order::solve_order_dual(&matrix, &scenario.solver.dual)?;
            println!(
                "dual order: {:?}  tour energy {:.3} J  ({} iterations, converged: {})",
                order.order,
                order.total_energy,
                trace.dual_objectives.len(),
                trace.converged
            );
            if args.exhaustive {
                let best = wpcn_core::order::solve_order_exhaustive(&matrix)?;
                println!(
                    "exhaustive:  {:?}  tour energy {:.3} J",
                    best.order, best.total_energy
                );
            }
            if let Some(path) = args.trace {
                let mut csv = String::from("iter,dual_objective,primal_cost,infeasibility_count\n");
                for i in 0..trace.dual_objectives.len() {
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        i + 1,
                        trace.dual_objectives[i],
                        trace.primal_costs[i],
                        trace.infeasibility_counts[i]
                    ));
                }
                fs::write(&path, csv).with_context(|| format!("writing `{}`", path.display()))?;
                println!("dual trace written to {}", path.display());
            }
        }
        Command::Hover(args) => {
            let scenario = load_scenario(&args.scenario)?;
            if args.user == 0 || args.user > scenario.users.len() {
                anyhow::bail!(CoreError::Scenario(format!(
                    "user index {} out of range 1..={}",
                    args.user,
                    scenario.users.len()
                )));
            }
            let comm = scenario.users[args.user - 1].comm();
            let radio = scenario.radio.to_params();
            let consts = derive_constants(&scenario.airframe)?;
            let solution = match scenario.mode {
                DuplexMode::Hd => solve_hd(
                    args.height,
                    &scenario.channel,
                    &radio,
                    &comm,
                    consts.hover_power(),
                )?,
                DuplexMode::Fd => solve_fd(
                    args.height,
                    &scenario.channel,
                    &radio,
                    &comm,
                    consts.hover_power(),
                )?,
            };
            println!(
                "{} hover at {} m for user {}:",
                solution.mode.label(),
                args.height,
                args.user
            );
            println!("  hover time    : {:.6} s", solution.hover_time);
            println!("  harvest time  : {:.6} s", solution.harvest_time);
            println!("  transmit time : {:.6} s", solution.transmit_time);
            println!("  harvest split : {:.6}", solution.time_split);
            println!("  user tx power : {:.6e} W", solution.user_tx_power);
            println!("  hover energy  : {:.3} J", solution.hover_energy);
        }
        Command::Trajectory(args) => {
            let limits = KinematicLimits::default();
            let consts = derive_constants(&wpcn_core::AirframeParams::default())?;
            let settings = ScaSettings::default();
            let (traj, energy, trace) =
                optimize_straight(args.distance, &limits, &consts, &settings)?;
            let peak = traj.velocities.iter().cloned().fold(0.0f64, f64::max);
            println!(
                "leg {} m: {:.2} s over {} slots, peak speed {:.2} m/s, energy {:.2} J",
                args.distance,
                traj.duration(),
                traj.slots(),
                peak,
                energy
            );
            println!(
                "refinement: {} iterations, converged: {}",
                trace.objectives.len(),
                trace.converged
            );
            if let Some(path) = args.trace {
                let mut csv = String::from("iter,objective_J,max_residual\n");
                for i in 0..trace.objectives.len() {
                    csv.push_str(&format!(
                        "{},{},{}\n",
                        i + 1,
                        trace.objectives[i],
                        trace.max_residuals[i]
                    ));
                }
                fs::write(&path, csv).with_context(|| format!("writing `{}`", path.display()))?;
                println!("refinement trace written to {}", path.display());
            }
        }
        Command::Sweep(args) => {
            let scenario = load_scenario(&args.scenario)?;
            print_warnings(&scenario);
            let modes = if args.modes.is_empty() {
                vec![scenario.mode]
            } else {
                args.modes.clone()
            };
            let table = wpcn_core::planner::sweep(&scenario, args.axis, &args.values, &modes)?;
            for row in &table.rows {
                if let Err(e) = &row.outcome {
                    eprintln!(
                        "warning: sweep point {} ({}) failed: {e}",
                        row.axis_value,
                        row.mode.label()
                    );
                }
            }
            let csv = emit_sweep(&table);
            match args.out {
                Some(path) => {
                    fs::write(&path, csv)
                        .with_context(|| format!("writing `{}`", path.display()))?;
                    println!("sweep csv written to {}", path.display());
                }
                None => print!("{csv}"),
            }
        }
        Command::Validate(args) => {
            let scenario = load_scenario(&args.scenario)?;
            print_warnings(&scenario);
            println!(
                "scenario ok: {} users, mode {}, H = {} m",
                scenario.users.len(),
                scenario.mode.label(),
                scenario.cruise_altitude_m
            );
        }
    }
    Ok(())
}

fn exit_code_for(error: &anyhow::Error) -> u8 {
    match error.downcast_ref::<CoreError>() {
        Some(CoreError::Infeasible(_)) | Some(CoreError::InfeasibleHeight { .. }) => 3,
        Some(CoreError::Solver(_)) => 4,
        Some(_) => 2,
        // I/O and other wrapper errors behave like validation failures.
        None => 2,
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}
