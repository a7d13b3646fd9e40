//! Command-line driver. Subcommands check the structural conditions on the
//! background and the multiplier weight, certify the positivity condition by
//! shooting (with an optional eigenvalue oracle), run the mode-reduced wave
//! simulator, verify the Hardy inequality, and emit the figure data as CSV.
//!
//! Exit codes: 0 success, 2 configuration error, 3 condition failure,
//! 4 certificate failure, 5 runtime or numerical fault, 6 simulation
//! invariant failure.

// `!(x > y)` validations intentionally reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{FileConfig, Preset};
use morawetz::geometry;
use morawetz::multiplier;
use morawetz::sim;
use morawetz::spectral::{self, Trajectory, VerifyOptions};
use morawetz::{linspace, Error as CoreError};

const EXIT_CONFIG: i32 = 2;
const EXIT_CONDITION: i32 = 3;
const EXIT_CERTIFICATE: i32 = 4;
const EXIT_FAULT: i32 = 5;
const EXIT_SIM_INVARIANT: i32 = 6;

#[derive(Parser)]
#[command(
    name = "morawetz",
    about = "Positivity certification and local-energy-decay diagnostics for mode-reduced wave equations",
    version
)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports and CSV data.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Background preset.
    #[arg(long, global = true, value_enum, default_value_t = Preset::Paper)]
    preset: Preset,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the structural conditions on the potentials and the weight.
    CheckConditions,
    /// Shoot the positivity ODE and evaluate the matching certificate.
    VerifySpectral {
        /// Attach the discretized minimum-eigenvalue oracle.
        #[arg(long)]
        oracle: bool,
        /// Matching margin (>= 1).
        #[arg(long)]
        margin: Option<f64>,
    },
    /// Integrate the ODE and write the trajectory only.
    Shoot {
        #[arg(long)]
        margin: Option<f64>,
    },
    /// Evolve the mode-reduced wave equation and check the run invariants.
    Simulate {
        /// Scenario: linear-free, linear-l2, linear-l10, nonlinear-l0.
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Discrete Hardy inequality: best constant plus randomized trials.
    Hardy,
    /// Write the four figure CSVs (potential profile and the solution on
    /// three windows).
    EmitPlots,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let file_cfg = match FileConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create output directory {}: {e}", cli.out.display());
        return EXIT_FAULT;
    }
    match &cli.cmd {
        Cmd::CheckConditions => cmd_check_conditions(&cli, &file_cfg),
        Cmd::VerifySpectral { oracle, margin } => {
            cmd_verify_spectral(&cli, &file_cfg, *oracle, *margin)
        }
        Cmd::Shoot { margin } => cmd_shoot(&cli, &file_cfg, *margin),
        Cmd::Simulate { scenario } => cmd_simulate(&cli, &file_cfg, scenario.as_deref()),
        Cmd::Hardy => cmd_hardy(&cli, &file_cfg),
        Cmd::EmitPlots => cmd_emit_plots(&cli, &file_cfg),
    }
}

fn config_error(e: anyhow::Error) -> i32 {
    eprintln!("configuration error: {e:#}");
    EXIT_CONFIG
}

fn fault(e: impl std::fmt::Display) -> i32 {
    eprintln!("error: {e}");
    EXIT_FAULT
}

/// Core usage/domain errors mean the configuration asked for something
/// invalid; everything else is a runtime fault.
fn core_error(e: CoreError) -> i32 {
    match e {
        CoreError::Usage(_) | CoreError::Domain(_) => config_error(e.into()),
        other => fault(other),
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), i32> {
    let file = File::create(path).map_err(|e| fault(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(fault)?;
    writeln!(w).map_err(fault)?;
    Ok(())
}

fn cmd_check_conditions(cli: &Cli, file_cfg: &FileConfig) -> i32 {
    let model = match file_cfg.model.build(cli.preset) {
        Ok(m) => m,
        Err(e) => return config_error(e),
    };
    let mult = match file_cfg.multiplier.build() {
        Ok(m) => m,
        Err(e) => return config_error(e),
    };
    let rho0 = file_cfg.spectral.rho0.unwrap_or(1000.0);
    let grid = linspace(-rho0, rho0, 4001);

    let potentials = match geometry::check_potential_conditions(&model, &grid) {
        Ok(r) => r,
        Err(e) => return core_error(e),
    };
    let weight = match multiplier::check_g_conditions(&mult, &grid) {
        Ok(r) => r,
        Err(e) => return core_error(e),
    };

    #[derive(Serialize)]
    struct Conditions<'a> {
        all_passed: bool,
        potentials: &'a morawetz::report::ConditionReport,
        weight: &'a morawetz::report::ConditionReport,
    }
    let all = potentials.all_passed() && weight.all_passed();
    let out = Conditions {
        all_passed: all,
        potentials: &potentials,
        weight: &weight,
    };
    if let Err(code) = write_json(&cli.out.join("conditions.json"), &out) {
        return code;
    }
    for check in potentials.checks.iter().chain(weight.checks.iter()) {
        println!(
            "{} {}: {}",
            if check.passed { "pass" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    if all {
        0
    } else {
        EXIT_CONDITION
    }
}

fn build_problem(cli: &Cli, file_cfg: &FileConfig) -> anyhow::Result<spectral::SpectralProblem> {
    let model = file_cfg.model.build(cli.preset)?;
    let mult = file_cfg.multiplier.build()?;
    file_cfg.spectral.build(model, mult)
}

fn cmd_verify_spectral(cli: &Cli, file_cfg: &FileConfig, oracle: bool, margin: Option<f64>) -> i32 {
    let prob = match build_problem(cli, file_cfg) {
        Ok(p) => p,
        Err(e) => return config_error(e),
    };
    let margin = margin.unwrap_or_else(|| file_cfg.spectral.margin());
    if margin < 1.0 {
        return config_error(anyhow::anyhow!("margin = {margin} must be at least 1"));
    }
    let opts = VerifyOptions {
        margin,
        resolution: file_cfg.spectral.resolution(),
        oracle_n: oracle.then(|| file_cfg.spectral.oracle_n()),
        ..VerifyOptions::default()
    };
    let (cert, traj) = match spectral::verify_with_options(&prob, &opts) {
        Ok(v) => v,
        Err(e) => return core_error(e),
    };
    if let Err(code) = write_json(&cli.out.join("certificate.json"), &cert) {
        return code;
    }
    if let Err(code) = write_trajectory(&cli.out.join("trajectory.csv"), &traj) {
        return code;
    }
    println!(
        "positive everywhere: {} (min psi = {:.6e})",
        cert.positive_everywhere, cert.min_psi
    );
    println!(
        "left end:  psi = {:.6e}, dpsi = {:.6e}, threshold = {:.6e} (margin 1: {:.6e}) -> {}",
        cert.psi_left,
        cert.dpsi_left,
        cert.threshold_left,
        cert.threshold_left_base,
        if cert.matching_left_ok { "ok" } else { "FAIL" }
    );
    println!(
        "right end: psi = {:.6e}, dpsi = {:.6e}, threshold = {:.6e} -> {}",
        cert.psi_right,
        cert.dpsi_right,
        cert.threshold_right,
        if cert.matching_right_ok { "ok" } else { "FAIL" }
    );
    if let Some(eig) = cert.oracle_min_eigenvalue {
        println!("oracle minimum eigenvalue: {eig:.6e}");
    }
    if !cert.asymptotics_valid {
        println!(
            "asymptotic matching invalid at rho0: eps' = {:.3e} is not below 1/100",
            cert.eps_prime
        );
    }
    if cert.verified {
        println!("certificate: verified");
        0
    } else {
        println!("certificate: NOT verified");
        EXIT_CERTIFICATE
    }
}

fn cmd_shoot(cli: &Cli, file_cfg: &FileConfig, margin: Option<f64>) -> i32 {
    let prob = match build_problem(cli, file_cfg) {
        Ok(p) => p,
        Err(e) => return config_error(e),
    };
    let margin = margin.unwrap_or_else(|| file_cfg.spectral.margin());
    if margin < 1.0 {
        return config_error(anyhow::anyhow!("margin = {margin} must be at least 1"));
    }
    let opts = spectral::ShootOptions {
        margin,
        resolution: file_cfg.spectral.resolution(),
        ..spectral::ShootOptions::default()
    };
    let traj = match spectral::shoot_with_options(&prob, &opts) {
        Ok(t) => t,
        Err(e) => return core_error(e),
    };
    if let Err(code) = write_trajectory(&cli.out.join("trajectory.csv"), &traj) {
        return code;
    }
    let left = traj.left();
    println!(
        "psi({}) = {:.6e}, dpsi = {:.6e}, samples = {}",
        left.rho,
        left.psi_reconstructed(),
        left.dpsi_reconstructed(),
        traj.samples.len()
    );
    0
}

fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), i32> {
    let file = File::create(path).map_err(|e| fault(format!("{}: {e}", path.display())))?;
    traj.write_csv(BufWriter::new(file)).map_err(fault)
}

fn cmd_simulate(cli: &Cli, file_cfg: &FileConfig, scenario: Option<&str>) -> i32 {
    let mut section = file_cfg.simulate.clone();
    if let Some(s) = scenario {
        section.scenario = Some(s.to_string());
    }
    let eps1 = file_cfg.spectral.eps1.unwrap_or(1e-3);
    let (cfg, thresholds) = match section.build(eps1) {
        Ok(v) => v,
        Err(e) => return config_error(e),
    };
    let report = match sim::run(&cfg, &thresholds) {
        Ok(r) => r,
        Err(e) => return core_error(e),
    };
    if let Err(code) = write_json(&cli.out.join("report.json"), &report) {
        return code;
    }
    let file = match File::create(cli.out.join("series.csv")) {
        Ok(f) => f,
        Err(e) => return fault(e),
    };
    if let Err(e) = report.write_csv(BufWriter::new(file)) {
        return fault(e);
    }
    let v = &report.verdicts;
    println!(
        "energy drift {:.3e} ({}), identity residual {:.3e} ({})",
        v.energy_drift,
        if v.energy_ok { "ok" } else { "FAIL" },
        report.identity_residual,
        if v.identity_ok { "ok" } else { "FAIL" }
    );
    println!(
        "weighted L2 nondecreasing: {}, terms III/IV nonnegative: {}, no blowup: {}",
        v.weighted_nondecreasing, v.terms_sign_ok, v.no_blowup
    );
    println!(
        "weighted_l2(t_end)/E = {:.6e}, pairing bound ok: {}, weighted bound ok: {}",
        report.weighted_over_energy, v.pairing_bound_ok, v.weighted_bound_ok
    );
    if v.all_ok() {
        0
    } else {
        EXIT_SIM_INVARIANT
    }
}

fn cmd_hardy(cli: &Cli, file_cfg: &FileConfig) -> i32 {
    let cfg = match file_cfg.hardy.build() {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    let report = match morawetz::hardy::verify_hardy(&cfg, file_cfg.hardy.trials(), cli.seed) {
        Ok(r) => r,
        Err(e) => return core_error(e),
    };
    if let Err(code) = write_json(&cli.out.join("hardy.json"), &report) {
        return code;
    }
    println!(
        "best constant {:.6e}; {}/{} trials passed against {:.6e}; worst ratio {:.4}",
        report.best_constant, report.pass_count, report.trials, report.c_used, report.worst_ratio
    );
    if report.all_passed() {
        0
    } else {
        EXIT_CONDITION
    }
}

fn cmd_emit_plots(cli: &Cli, file_cfg: &FileConfig) -> i32 {
    let prob = match build_problem(cli, file_cfg) {
        Ok(p) => p,
        Err(e) => return config_error(e),
    };
    let margin = file_cfg.spectral.margin();
    let traj = match spectral::shoot(&prob, margin) {
        Ok(t) => t,
        Err(e) => return core_error(e),
    };
    let points = file_cfg.output.plot_points();
    let rho0 = prob.rho0;

    // (i) potential profile -g'''/2 - gV'
    let write_profile = || -> Result<(), i32> {
        let path = cli.out.join("fig1_potential.csv");
        let file = File::create(&path).map_err(|e| fault(format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "rho,value").map_err(fault)?;
        for rho in linspace(-rho0, rho0, points) {
            use morawetz::multiplier::SmoothWeight;
            let s = prob.mult.eval(rho);
            let dv = geometry::sample_potentials(&prob.model, rho).dv;
            writeln!(w, "{},{}", rho, -0.5 * s.g3 - s.g * dv).map_err(fault)?;
        }
        Ok(())
    };
    if let Err(code) = write_profile() {
        return code;
    }

    // (ii)-(iv) the solution on the three windows
    let windows = [
        ("fig2_solution_neg.csv", -rho0, 0.0),
        ("fig3_solution_middle.csv", -10.0, 15.0),
        ("fig4_solution_pos.csv", 0.0, rho0),
    ];
    for (name, lo, hi) in windows {
        let path = cli.out.join(name);
        let file = match File::create(&path) {
            Ok(f) => f,
            Err(e) => return fault(format!("{}: {e}", path.display())),
        };
        let mut w = BufWriter::new(file);
        if let Err(e) = writeln!(w, "rho,value") {
            return fault(e);
        }
        for rho in linspace(lo, hi, points) {
            let (psi, _) = match spectral::eval_trajectory(&prob, &traj, rho) {
                Ok(v) => v,
                Err(e) => return core_error(e),
            };
            if let Err(e) = writeln!(w, "{rho},{psi}") {
                return fault(e);
            }
        }
    }
    println!("wrote fig1_potential.csv and three solution windows to {}", cli.out.display());
    0
}
