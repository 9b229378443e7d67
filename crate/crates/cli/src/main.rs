//! Command-line driver for the verification chain and its supporting tables.
//!
//! Every subcommand prints a single JSON report to stdout and, with `--out`,
//! writes the same report plus auxiliary CSV tables into the given directory.
//! Stdout carries no timings or host data — identical inputs produce
//! identical bytes — while per-stage timings go to stderr.
//!
//! Exit codes: 0 on pass, 1 when a mathematical inequality fails beyond its
//! tolerance, 2 on configuration or numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use capspec_core::barycenter::{find_balanced_pole, steklov_limit_check};
use capspec_core::cap::{radius_to_area, solve_cap_mode_n};
use capspec_core::domain::{ConformalDomain, ProfileFunction};
use capspec_core::error::Error;
use capspec_core::neumann2d::{solve_neumann, DiskMesh};
use capspec_core::radial::solve_radial_weighted;
use capspec_core::verify::{
    isoperimetric_profile_check, monotonicity_sweep, verify_chain, VerifyConfig,
};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Parser)]
#[command(
    name = "capspec",
    about = "Eigenvalue comparison chain for conformally presented spherical domains",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory receiving the JSON report and auxiliary CSV tables.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Multiplies every resolution in the config (and the cap solver grid).
    #[arg(long, global = true, value_name = "F", default_value_t = 1.0)]
    resolution_scale: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full chain μ₂(Ω) ≤ κ₁(Ω, q̄) ≤ μ₂(Ω*) for a domain config.
    Verify { config: PathBuf },

    /// Neumann spectra of the geodesic cap of the given radius, one angular
    /// mode per table row.
    Cap {
        /// Geodesic radius in (0, π).
        #[arg(long)]
        radius: f64,
        /// Highest angular mode to solve (modes 0..=K).
        #[arg(long, value_name = "K", default_value_t = 2)]
        modes: u32,
    },

    /// Weighted radial spectrum of a domain at a prescribed pole.
    Radial {
        config: PathBuf,
        /// Pole as "re,im" with |q| < 1.
        #[arg(long, value_parser = parse_pole, value_name = "RE,IM")]
        pole: Complex64,
    },

    /// Low Neumann spectrum of the domain by weighted finite elements.
    Neumann2d { config: PathBuf },

    /// Locate the balanced pole q̄ (the zero of the barycenter field V).
    Barycenter { config: PathBuf },

    /// Radial-sector eigenvalues against their boundary-concentration limits
    /// 2πℓ/M as the pole magnitude approaches 1.
    Steklov {
        config: PathBuf,
        /// Pole magnitudes, increasing toward 1.
        #[arg(
            long,
            value_delimiter = ',',
            value_name = "M1,M2,...",
            default_values_t = [0.9, 0.99, 0.999]
        )]
        magnitudes: Vec<f64>,
    },

    /// κ₁ along the profile segment from the equal-area cap profile to a
    /// dominating comparison profile; checks it never increases.
    SweepMonotone { config: PathBuf },

    /// Per-node isoperimetric sandwich a(4π−a) ≤ L(a)² ≤ G_q(a).
    Profile {
        config: PathBuf,
        /// Pole as "re,im" with |q| < 1.
        #[arg(long, value_parser = parse_pole, value_name = "RE,IM")]
        pole: Complex64,
    },
}

fn parse_pole(text: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err("expected \"re,im\"".into());
    }
    let re: f64 = parts[0].trim().parse().map_err(|e| format!("re: {e}"))?;
    let im: f64 = parts[1].trim().parse().map_err(|e| format!("im: {e}"))?;
    Ok(Complex64::new(re, im))
}

/// A subcommand's complete output: the stdout report plus named CSV tables
/// for `--out`, and whether every checked inequality held.
struct Report {
    text: String,
    tables: Vec<(&'static str, String)>,
    pass: bool,
}

impl Report {
    fn passing(json: Value, tables: Vec<(&'static str, String)>) -> Self {
        Report { text: to_pretty(&json), tables, pass: true }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        // An ordering that the mathematics guarantees came out reversed.
        Error::OrderingViolation { .. } | Error::ModeOrdering { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !(cli.resolution_scale.is_finite() && cli.resolution_scale > 0.0) {
        eprintln!("error: --resolution-scale must be positive and finite");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.text);
            if let Some(dir) = &cli.out {
                if let Err(err) = persist(dir, &cli.command, &report.text, &report.tables) {
                    eprintln!("error: {err}");
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(if report.pass { 0 } else { 1 })
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn run(cli: &Cli) -> capspec_core::Result<Report> {
    let started = Instant::now();
    let report = match &cli.command {
        Command::Verify { config } => run_verify(config, cli.resolution_scale),
        Command::Cap { radius, modes } => run_cap(*radius, *modes, cli.resolution_scale),
        Command::Radial { config, pole } => run_radial(config, *pole, cli.resolution_scale),
        Command::Neumann2d { config } => run_neumann2d(config, cli.resolution_scale),
        Command::Barycenter { config } => run_barycenter(config, cli.resolution_scale),
        Command::Steklov { config, magnitudes } => {
            run_steklov(config, magnitudes, cli.resolution_scale)
        }
        Command::SweepMonotone { config } => run_sweep(config, cli.resolution_scale),
        Command::Profile { config, pole } => run_profile(config, *pole, cli.resolution_scale),
    };
    eprintln!(
        "timing: {} {:.3}s",
        command_name(&cli.command),
        started.elapsed().as_secs_f64()
    );
    report
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Verify { .. } => "verify",
        Command::Cap { .. } => "cap",
        Command::Radial { .. } => "radial",
        Command::Neumann2d { .. } => "neumann2d",
        Command::Barycenter { .. } => "barycenter",
        Command::Steklov { .. } => "steklov",
        Command::SweepMonotone { .. } => "sweep-monotone",
        Command::Profile { .. } => "profile",
    }
}

fn load_config(path: &Path, scale: f64) -> capspec_core::Result<VerifyConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let config = VerifyConfig::from_json(&text)?;
    Ok(if scale == 1.0 { config } else { config.scaled(scale) })
}

/// The 1D grids are halved for Richardson estimates and the weighted solver
/// needs an even cell count, so reject anything that cannot survive both.
fn check_sl_grid(n: usize) -> capspec_core::Result<()> {
    if n < 32 || n % 4 != 0 {
        return Err(Error::Config(format!(
            "sl_grid must be a multiple of 4, at least 32 (got {n})"
        )));
    }
    Ok(())
}

fn domain_of(config: &VerifyConfig) -> capspec_core::Result<ConformalDomain> {
    let res = &config.resolutions;
    ConformalDomain::new(config.domain.map()?, res.n_r, res.n_theta)
}

fn run_verify(path: &Path, scale: f64) -> capspec_core::Result<Report> {
    let config = load_config(path, scale)?;
    let report = verify_chain(&config)?;
    Ok(Report {
        text: report.to_json(),
        tables: Vec::new(),
        pass: report.verdict,
    })
}

fn run_cap(radius: f64, modes: u32, scale: f64) -> capspec_core::Result<Report> {
    // Mirrors the cap solver's own default cell policy, scaled.
    let base = if radius > 3.0 { 8192.0 } else { 2048.0 };
    let cells = (((base * scale).round() as usize).max(64) / 2) * 2;
    let per_mode = 3usize;

    let mut spectra = Vec::new();
    for mode in 0..=modes {
        spectra.push(solve_cap_mode_n(radius, mode, per_mode, cells)?);
    }

    let mut rows = String::from("mode,j,eigenvalue,boundary_value\n");
    for spectrum in &spectra {
        for j in 0..per_mode {
            rows.push_str(&format!(
                "{},{},{},{}\n",
                spectrum.mode,
                j + 1,
                spectrum.eigenvalue(j),
                spectrum.boundary_value(j)
            ));
        }
    }

    let mut json = Map::new();
    json.insert("radius".into(), json!(radius));
    json.insert("area".into(), json!(radius_to_area(radius)?));
    json.insert("cells".into(), json!(cells));
    json.insert(
        "modes".into(),
        Value::Array(
            spectra
                .iter()
                .map(|s| {
                    json!({
                        "mode": s.mode,
                        "eigenvalues": (0..per_mode).map(|j| s.eigenvalue(j)).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        ),
    );
    if modes >= 1 {
        let mu11 = spectra[1].eigenvalue(0);
        let mu02 = spectra[0].eigenvalue(1);
        if mu11 >= mu02 {
            return Err(Error::ModeOrdering { first: mu11, second: mu02 });
        }
        json.insert("mu2".into(), json!(mu11));
        json.insert("mode_gap".into(), json!(mu02 - mu11));
    }

    Ok(Report::passing(Value::Object(json), vec![("cap_modes.csv", rows)]))
}

fn run_radial(path: &Path, pole: Complex64, scale: f64) -> capspec_core::Result<Report> {
    let config = load_config(path, scale)?;
    check_sl_grid(config.resolutions.sl_grid)?;
    let domain = domain_of(&config)?;
    let density = domain.recentered(pole)?;
    let count = 4;
    let solution = solve_radial_weighted(&density, config.resolutions.sl_grid, count)?;

    let mut rows = String::from("center,width");
    for k in 1..=count {
        rows.push_str(&format!(",f{k}"));
    }
    rows.push('\n');
    for i in 0..solution.n() {
        rows.push_str(&format!("{},{}", solution.centers[i], solution.widths[i]));
        for f in &solution.eigenfunctions {
            rows.push_str(&format!(",{}", f[i]));
        }
        rows.push('\n');
    }

    let json = json!({
        "pole": [pole.re, pole.im],
        "mass": density.mass(),
        "cells": config.resolutions.sl_grid,
        "eigenvalues": solution.eigenvalues,
    });
    Ok(Report::passing(json, vec![("radial_modes.csv", rows)]))
}

fn run_neumann2d(path: &Path, scale: f64) -> capspec_core::Result<Report> {
    let config = load_config(path, scale)?;
    if config.resolutions.rings < 4 {
        return Err(Error::Config(format!(
            "rings must be at least 4 (got {})",
            config.resolutions.rings
        )));
    }
    let domain = domain_of(&config)?;
    let mesh = DiskMesh::new(config.resolutions.rings);
    let result = solve_neumann(&mesh, |z| Ok(domain.rho2(z)), 6)?;

    let mut rows = String::from("k,eigenvalue,residual\n");
    for (k, (value, residual)) in result
        .eigenvalues
        .iter()
        .zip(&result.residuals)
        .enumerate()
    {
        rows.push_str(&format!("{},{},{}\n", k + 1, value, residual));
    }

    let json = json!({
        "rings": config.resolutions.rings,
        "vertices": mesh.vertex_count(),
        "mass": domain.area(),
        "eigenvalues": result.eigenvalues,
        "residuals": result.residuals,
    });
    Ok(Report::passing(json, vec![("neumann_modes.csv", rows)]))
}

fn run_barycenter(path: &Path, scale: f64) -> capspec_core::Result<Report> {
    let config = load_config(path, scale)?;
    check_sl_grid(config.resolutions.sl_grid)?;
    let domain = domain_of(&config)?;
    let mass = domain.area();
    let tolerance = config
        .tolerances
        .residual_v
        .unwrap_or(1e-6 * mass.sqrt());
    let found = find_balanced_pole(&domain, config.resolutions.sl_grid, tolerance)?;

    let json = json!({
        "mass": mass,
        "balanced_pole": [found.pole.re, found.pole.im],
        "residual": found.residual,
        "residual_tolerance": tolerance,
        "winding": found.winding,
        "iterations": found.iterations,
    });
    Ok(Report::passing(json, Vec::new()))
}

fn run_steklov(path: &Path, magnitudes: &[f64], scale: f64) -> capspec_core::Result<Report> {
    if magnitudes.is_empty() {
        return Err(Error::Config("at least one magnitude is required".into()));
    }
    for pair in magnitudes.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::Config(format!(
                "magnitudes must increase toward 1 (got {} after {})",
                pair[1], pair[0]
            )));
        }
    }
    let config = load_config(path, scale)?;
    check_sl_grid(config.resolutions.sl_grid)?;
    let domain = domain_of(&config)?;
    let sectors = 2;
    let found = steklov_limit_check(&domain, magnitudes, sectors, config.resolutions.sl_grid)?;

    let mut rows = String::from("magnitude,sector,eigenvalue,limit,abs_error\n");
    for row in &found {
        rows.push_str(&format!(
            "{},{},{},{},{}\n",
            row.magnitude, row.sector, row.eigenvalue, row.limit, row.abs_error
        ));
    }

    let json = json!({
        "mass": domain.area(),
        "sectors": sectors,
        "magnitudes": magnitudes,
        "rows": found
            .iter()
            .map(|r| {
                json!({
                    "magnitude": r.magnitude,
                    "sector": r.sector,
                    "eigenvalue": r.eigenvalue,
                    "limit": r.limit,
                    "abs_error": r.abs_error,
                })
            })
            .collect::<Vec<_>>(),
    });
    Ok(Report::passing(json, vec![("steklov_rows.csv", rows)]))
}

fn run_sweep(path: &Path, scale: f64) -> capspec_core::Result<Report> {
    let config = load_config(path, scale)?;
    check_sl_grid(config.resolutions.sl_grid)?;
    let domain = domain_of(&config)?;
    let mass = domain.area();
    let n = config.resolutions.sl_grid;

    // Canonical comparison pair at the domain's mass: the equal-area cap
    // profile below a profile bumped in the interior, vanishing to the same
    // 4πa asymptotics at a = 0.
    let g0 = ProfileFunction::cap(mass, n)?;
    let g1 = ProfileFunction::analytic(mass, n, |a| {
        a * (FOUR_PI - a) + a * (mass - a) / (mass * mass)
    })?;
    let steps = 10;
    let sweep = monotonicity_sweep(&g0, &g1, steps)?;

    let mut rows = String::from("t,kappa1\n");
    for row in &sweep.rows {
        rows.push_str(&format!("{},{}\n", row.t, row.kappa1));
    }
    let mut midpoints = String::from("t_mid,analytic,difference_quotient,relative_deviation\n");
    for row in &sweep.midpoints {
        midpoints.push_str(&format!(
            "{},{},{},{}\n",
            row.t_mid, row.analytic, row.difference_quotient, row.relative_deviation
        ));
    }

    let json = json!({
        "mass": mass,
        "steps": steps,
        "cells": n,
        "rows": sweep
            .rows
            .iter()
            .map(|r| json!({"t": r.t, "kappa1": r.kappa1}))
            .collect::<Vec<_>>(),
        "max_midpoint_deviation": sweep
            .midpoints
            .iter()
            .map(|r| r.relative_deviation)
            .fold(0.0f64, f64::max),
    });
    Ok(Report::passing(
        json,
        vec![("sweep_rows.csv", rows), ("sweep_midpoints.csv", midpoints)],
    ))
}

fn run_profile(path: &Path, pole: Complex64, scale: f64) -> capspec_core::Result<Report> {
    let config = load_config(path, scale)?;
    check_sl_grid(config.resolutions.sl_grid)?;
    let domain = domain_of(&config)?;
    let nodes = (config.resolutions.sl_grid / 8).max(32);
    let found = isoperimetric_profile_check(&domain, pole, nodes)?;

    let mut rows = String::from("area,profile,cap_profile,boundary_length_sq\n");
    for row in &found {
        rows.push_str(&format!(
            "{},{},{},{}\n",
            row.area, row.profile, row.cap_profile, row.boundary_length_sq
        ));
    }

    // Largest relative isoperimetric excess over the cap closed form; zero
    // exactly when the domain is a centered cap.
    let max_excess = found
        .iter()
        .map(|r| (r.profile - r.cap_profile) / r.cap_profile.abs().max(1e-300))
        .fold(f64::NEG_INFINITY, f64::max);

    let json = json!({
        "pole": [pole.re, pole.im],
        "mass": domain.area(),
        "nodes": nodes,
        "max_relative_excess": max_excess,
        "sandwich_ok": true,
    });
    Ok(Report::passing(json, vec![("profile_rows.csv", rows)]))
}

fn to_pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

fn persist(
    dir: &Path,
    command: &Command,
    report: &str,
    tables: &[(&'static str, String)],
) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{}.json", command_name(command))), report)?;
    for (name, contents) in tables {
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pole_parsing_accepts_pairs_only() {
        assert_eq!(parse_pole("0.3,-0.25"), Ok(Complex64::new(0.3, -0.25)));
        assert_eq!(parse_pole(" 0.1 , 0.2 "), Ok(Complex64::new(0.1, 0.2)));
        assert!(parse_pole("0.3").is_err());
        assert!(parse_pole("0.3,0.1,0.0").is_err());
        assert!(parse_pole("a,b").is_err());
    }

    #[test]
    fn inequality_failures_are_exit_1_everything_else_2() {
        assert_eq!(
            exit_code_for(&Error::OrderingViolation { index: 3, lower: 1.0, upper: 2.0 }),
            1
        );
        assert_eq!(
            exit_code_for(&Error::ModeOrdering { first: 2.0, second: 1.0 }),
            1
        );
        assert_eq!(exit_code_for(&Error::Config("x".into())), 2);
        assert_eq!(
            exit_code_for(&Error::NoConvergence { what: "solver", iterations: 9 }),
            2
        );
        assert_eq!(exit_code_for(&Error::DegreeCheckFailed { winding: 0 }), 2);
    }
}
