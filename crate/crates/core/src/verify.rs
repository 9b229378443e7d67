//! The verification driver: configs, the inequality chain, and the
//! supporting tables.
//!
//! A run deserializes a domain config, locates the balanced pole, computes
//! the three chain quantities
//!
//!   μ₂(Ω)  —  weighted finite elements on the disk,
//!   κ₁(Ω, q̄)  —  radial Sturm–Liouville problem at the balanced pole,
//!   μ₂(Ω*)  —  cap-mode solve at the equal-area geodesic radius,
//!
//! and reports whether μ₂(Ω) ≤ κ₁ ≤ μ₂(Ω*) holds within an aggregate
//! tolerance ε_tot assembled from one Richardson refinement step per
//! discretization. Reports carry every resolution and tolerance used and
//! contain no timing or host data, so identical configs produce identical
//! bytes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::barycenter::{find_balanced_pole, BalancedPoleResult};
use crate::cap::{area_to_radius, solve_cap_mode_n};
use crate::domain::{AnalyticMap, ConformalDomain, ProfileFunction};
use crate::error::{Error, Result};
use crate::neumann2d::{solve_neumann, DiskMesh};
use crate::radial::{
    blend_profiles, feynman_hellmann_derivative, solve_radial_weighted, solve_sl_profile,
};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Domain description: power-series coefficients of the disk-to-sphere map,
/// as [re, im] pairs for c₁, c₂, …, with an optional constant term c₀.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainSpec {
    pub coefficients: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<[f64; 2]>,
}

impl DomainSpec {
    pub fn map(&self) -> Result<AnalyticMap> {
        let coefficients: Vec<Complex64> = self
            .coefficients
            .iter()
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        match self.constant {
            Some(c) => AnalyticMap::with_constant(Complex64::new(c[0], c[1]), coefficients),
            None => AnalyticMap::new(coefficients),
        }
    }
}

fn default_rings() -> usize {
    128
}
fn default_sl_grid() -> usize {
    2048
}
fn default_quadrature() -> usize {
    256
}

/// Grid sizes for the three discretizations plus the density quadrature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Resolutions {
    /// Mesh rings for the finite-element solve (4·rings angular nodes).
    #[serde(default = "default_rings")]
    pub rings: usize,
    /// Cells for every one-dimensional Sturm–Liouville grid.
    #[serde(default = "default_sl_grid")]
    pub sl_grid: usize,
    /// Radial Gauss–Legendre order of the density quadrature.
    #[serde(default = "default_quadrature")]
    pub n_r: usize,
    /// Baseline angular nodes of the density quadrature (raised
    /// automatically near concentration).
    #[serde(default = "default_quadrature")]
    pub n_theta: usize,
}

impl Default for Resolutions {
    fn default() -> Self {
        Self {
            rings: default_rings(),
            sl_grid: default_sl_grid(),
            n_r: default_quadrature(),
            n_theta: default_quadrature(),
        }
    }
}

impl Resolutions {
    /// Every grid multiplied by `factor`, kept in each solver's legal range
    /// (SL grids stay multiples of 4 so their Richardson halves stay even).
    pub fn scaled(&self, factor: f64) -> Self {
        let scale = |v: usize, lo: usize| -> usize {
            ((v as f64 * factor).round() as usize).max(lo)
        };
        Self {
            rings: scale(self.rings, 4),
            sl_grid: scale(self.sl_grid, 32).div_ceil(4) * 4,
            n_r: scale(self.n_r, 16),
            n_theta: scale(self.n_theta, 32),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute bound on |V(q̄)|; when absent, 10⁻⁶·√M is used.
    #[serde(default, rename = "residual_V", skip_serializing_if = "Option::is_none")]
    pub residual_v: Option<f64>,
}

/// One verification run's input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub domain: DomainSpec,
    #[serde(default)]
    pub resolutions: Resolutions,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl VerifyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The same run with all resolutions multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut scaled = self.clone();
        scaled.resolutions = self.resolutions.scaled(factor);
        scaled
    }
}

/// Everything a chain verification produces. Field order is the
/// serialization order; no field depends on the host or the wall clock.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub domain: DomainSpec,
    pub mass: f64,
    pub cap_radius: f64,
    pub balanced_pole: [f64; 2],
    pub pole_residual: f64,
    pub pole_winding: i64,
    pub pole_iterations: usize,
    pub mu2_domain: f64,
    pub kappa1: f64,
    pub mu2_cap: f64,
    /// κ₁ − μ₂(Ω): the first chain link, ≥ −ε_tot on a pass.
    pub lower_link: f64,
    /// μ₂(Ω*) − κ₁: the second chain link, ≥ −ε_tot on a pass.
    pub upper_link: f64,
    pub fem_error_estimate: f64,
    pub sl_error_estimate: f64,
    pub eps_tot: f64,
    /// Links within ε_tot of zero — the equality case, attained exactly
    /// when the domain is a recentered geodesic cap.
    pub near_equality: [bool; 2],
    pub verdict: bool,
    pub resolutions: Resolutions,
    pub residual_tolerance: f64,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

/// Runs the full chain verification for one config.
pub fn verify_chain(config: &VerifyConfig) -> Result<VerificationReport> {
    let res = &config.resolutions;
    if res.sl_grid < 32 || res.sl_grid % 4 != 0 {
        return Err(Error::Config(format!(
            "sl_grid must be a multiple of 4, at least 32 (got {}); the run \
             halves it for the Richardson estimate",
            res.sl_grid
        )));
    }
    if res.rings < 4 {
        return Err(Error::Config(format!(
            "rings must be at least 4 (got {})",
            res.rings
        )));
    }
    let map = config.domain.map()?;
    let domain = ConformalDomain::new(map, res.n_r, res.n_theta)?;
    let mass = domain.area();
    let cap_radius = area_to_radius(mass)?;
    let residual_tolerance = config
        .tolerances
        .residual_v
        .unwrap_or(1e-6 * mass.sqrt());

    let pole: BalancedPoleResult = find_balanced_pole(&domain, res.sl_grid, residual_tolerance)?;
    let density = domain.recentered(pole.pole)?;

    // Radial eigenvalue at the balanced pole, with one Richardson step.
    let kappa1 = solve_radial_weighted(&density, res.sl_grid, 1)?.eigenvalues[0];
    let kappa1_coarse = solve_radial_weighted(&density, res.sl_grid / 2, 1)?.eigenvalues[0];
    let mut sl_error = (kappa1 - kappa1_coarse).abs() / 3.0;

    // Cap side at the equal-area radius, same estimator.
    let mu2_cap = solve_cap_mode_n(cap_radius, 1, 1, res.sl_grid)?.eigenvalue(0);
    let mu2_cap_coarse = solve_cap_mode_n(cap_radius, 1, 1, res.sl_grid / 2)?.eigenvalue(0);
    sl_error += (mu2_cap - mu2_cap_coarse).abs() / 3.0;

    // Weighted finite elements for μ₂(Ω); the weight is the recentered
    // density at the balanced pole (any pole gives the same continuum
    // eigenvalue; this one keeps the whole run on one density).
    let weight = |z: Complex64| -> Result<f64> { Ok(density.rho2(z)) };
    let mu2_domain = solve_neumann(&DiskMesh::new(res.rings), weight, 2)?.eigenvalues[1];
    let mu2_coarse = solve_neumann(&DiskMesh::new(res.rings / 2), weight, 2)?.eigenvalues[1];
    let fem_error = (mu2_domain - mu2_coarse).abs() / 3.0;

    let eps_tot = 2.0 * (fem_error + sl_error);
    let lower_link = kappa1 - mu2_domain;
    let upper_link = mu2_cap - kappa1;
    let verdict = lower_link >= -eps_tot && upper_link >= -eps_tot;

    Ok(VerificationReport {
        domain: config.domain.clone(),
        mass,
        cap_radius,
        balanced_pole: [pole.pole.re, pole.pole.im],
        pole_residual: pole.residual,
        pole_winding: pole.winding,
        pole_iterations: pole.iterations,
        mu2_domain,
        kappa1,
        mu2_cap,
        lower_link,
        upper_link,
        fem_error_estimate: fem_error,
        sl_error_estimate: sl_error,
        eps_tot,
        near_equality: [lower_link.abs() <= eps_tot, upper_link.abs() <= eps_tot],
        verdict,
        resolutions: res.clone(),
        residual_tolerance,
    })
}

/// One step of the profile-interpolation sweep.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityRow {
    pub t: f64,
    pub kappa1: f64,
}

/// Derivative agreement at the midpoint of one sweep step: the discrete
/// eigenvalue's exact derivative against the step's difference quotient.
#[derive(Debug, Clone, Serialize)]
pub struct MidpointDerivativeRow {
    pub t_mid: f64,
    pub analytic: f64,
    pub difference_quotient: f64,
    pub relative_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicitySweep {
    pub rows: Vec<MonotonicityRow>,
    pub midpoints: Vec<MidpointDerivativeRow>,
}

/// Sweeps κ₁ along the segment G_t = (1−t)G₀ + tG₁ and checks it never
/// increases. Requires G₀ ≤ G₁ nodewise — that ordering is what makes the
/// decrease a theorem rather than an observation.
pub fn monotonicity_sweep(
    g0: &ProfileFunction,
    g1: &ProfileFunction,
    steps: usize,
) -> Result<MonotonicitySweep> {
    assert!(steps >= 1);
    if !g0.compatible(g1) {
        return Err(Error::ProfileMismatch);
    }
    for i in 0..g0.len() {
        if g0.values()[i] > g1.values()[i] {
            return Err(Error::OrderingViolation {
                index: i,
                lower: g1.values()[i],
                upper: g0.values()[i],
            });
        }
    }

    let mut rows = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let blend = blend_profiles(g0, g1, t)?;
        let kappa1 = solve_sl_profile(&blend, 1)?.eigenvalues[0];
        rows.push(MonotonicityRow { t, kappa1 });
    }
    for i in 1..rows.len() {
        // Exact-arithmetic monotonicity survives discretization; only
        // rounding noise is forgiven.
        let slack = 1e-10 * rows[i - 1].kappa1.abs().max(1.0);
        if rows[i].kappa1 > rows[i - 1].kappa1 + slack {
            return Err(Error::OrderingViolation {
                index: i,
                lower: rows[i - 1].kappa1,
                upper: rows[i].kappa1,
            });
        }
    }

    let mut midpoints = Vec::with_capacity(steps);
    let h = 1.0 / steps as f64;
    for i in 0..steps {
        let t_mid = (i as f64 + 0.5) * h;
        let analytic = feynman_hellmann_derivative(g0, g1, t_mid)?;
        let quotient = (rows[i + 1].kappa1 - rows[i].kappa1) / h;
        let scale = analytic.abs().max(quotient.abs()).max(1e-300);
        midpoints.push(MidpointDerivativeRow {
            t_mid,
            analytic,
            difference_quotient: quotient,
            relative_deviation: (analytic - quotient).abs() / scale,
        });
    }
    Ok(MonotonicitySweep { rows, midpoints })
}

/// One node of the isoperimetric sandwich table.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileCheckRow {
    pub area: f64,
    pub profile: f64,
    pub cap_profile: f64,
    pub boundary_length_sq: f64,
}

/// Tabulates G_q against the cap closed form a(4π − a) and the level-curve
/// length, asserting a(4π − a) ≤ L² ≤ G at every node within grid slack.
pub fn isoperimetric_profile_check(
    domain: &ConformalDomain,
    q: Complex64,
    nodes: usize,
) -> Result<Vec<ProfileCheckRow>> {
    let density = domain.recentered(q)?;
    let profile = density.profile(nodes)?;
    let mass = profile.total_area();
    let mut rows = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let area = profile.center(i);
        let g = profile.values()[i];
        let cap_form = area * (FOUR_PI - area);
        let length = density.level_curve_length(area)?;
        rows.push(ProfileCheckRow {
            area,
            profile: g,
            cap_profile: cap_form,
            boundary_length_sq: length * length,
        });
    }
    for (i, row) in rows.iter().enumerate() {
        // The discrete Jensen step L² ≤ G is exact; the isoperimetric
        // lower bound is a continuum statement, so it gets the grid slack.
        let slack = 1e-4 * row.cap_profile.abs().max(mass);
        if row.boundary_length_sq > row.profile + slack
            || row.cap_profile > row.boundary_length_sq + slack
        {
            return Err(Error::OrderingViolation {
                index: i,
                lower: row.cap_profile,
                upper: row.boundary_length_sq,
            });
        }
    }
    Ok(rows)
}
