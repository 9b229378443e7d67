//! Neumann modes of geodesic caps, separated by angular frequency.
//!
//! A cap of geodesic radius R carries the radial problems
//!
//!   −(sin r · v′)′ + (k²/sin r) v = μ sin r · v   on (0, R),   v′(R) = 0,
//!
//! one per angular mode k ≥ 0. The first positive Neumann eigenvalue of the
//! cap is μ₁₁, the ground state of mode 1; the competing candidate is μ₀₂,
//! the first excited state of mode 0. The hemisphere (R = π/2) has
//! μ₁₁ = 2 with eigenfunction sin r, and μ₀₂ → 2 as R → π.
//!
//! Eigenfunctions are normalized to ∫₀ᴿ v² sin r dr = 1, the convention under
//! which the boundary perturbation identity
//!
//!   dμ₀ⱼ/dR = −μ₀ⱼ · v₀ⱼ(R)² · sin R
//!
//! holds without extra factors.

use crate::error::{Error, Result};
use crate::radial::{solve_flux_form, uniform_edges, SlSolution};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const PI: f64 = std::f64::consts::PI;

/// Default cell count; caps close to the full sphere get a finer grid because
/// sin r degenerates at both ends of (0, R).
const DEFAULT_CELLS: usize = 2048;
const NEAR_SPHERE_CELLS: usize = 8192;
const NEAR_SPHERE_RADIUS: f64 = 3.0;

/// Eigenpairs of one angular mode of a cap.
#[derive(Debug, Clone)]
pub struct CapModeSpectrum {
    pub radius: f64,
    pub mode: u32,
    pub solution: SlSolution,
}

impl CapModeSpectrum {
    pub fn eigenvalue(&self, j: usize) -> f64 {
        self.solution.eigenvalues[j]
    }

    /// Eigenfunction value at the boundary r = R, extrapolated from the last
    /// cell (second-order, using v′(R) = 0).
    pub fn boundary_value(&self, j: usize) -> f64 {
        let v = &self.solution.eigenfunctions[j];
        v[v.len() - 1]
    }
}

/// Geodesic radius of the cap with the given area: R = arccos(1 − M/2π).
pub fn area_to_radius(area: f64) -> Result<f64> {
    if !(area > 0.0 && area < 2.0 * TWO_PI) {
        return Err(Error::AreaOutOfRange { area });
    }
    Ok((1.0 - area / TWO_PI).acos())
}

/// Area of the cap with geodesic radius R: M = 2π(1 − cos R).
pub fn radius_to_area(radius: f64) -> Result<f64> {
    if !(radius > 0.0 && radius < PI) {
        return Err(Error::RadiusOutOfRange { radius, range: "(0, π)" });
    }
    Ok(TWO_PI * (1.0 - radius.cos()))
}

fn cells_for(radius: f64) -> usize {
    if radius > NEAR_SPHERE_RADIUS {
        NEAR_SPHERE_CELLS
    } else {
        DEFAULT_CELLS
    }
}

/// Lowest `count` eigenpairs of angular mode `mode` on the cap of radius
/// `radius`, on a grid sized for the radius.
pub fn solve_cap_mode(radius: f64, mode: u32, count: usize) -> Result<CapModeSpectrum> {
    solve_cap_mode_n(radius, mode, count, cells_for(radius))
}

/// Same as [`solve_cap_mode`] with an explicit cell count.
pub fn solve_cap_mode_n(
    radius: f64,
    mode: u32,
    count: usize,
    n: usize,
) -> Result<CapModeSpectrum> {
    if !(radius > 0.0 && radius < PI) {
        return Err(Error::RadiusOutOfRange { radius, range: "(0, π)" });
    }
    assert!(n >= 16 && count >= 1);
    let edges = uniform_edges(radius, n);
    let ell2 = (mode as f64).powi(2);
    let (eigenvalues, eigenfunctions, centers, widths) = solve_flux_form(
        &edges,
        |r| r.sin(),
        |r| if mode == 0 { 0.0 } else { ell2 / r.sin() },
        |r| r.sin(),
        count,
    );
    Ok(CapModeSpectrum {
        radius,
        mode,
        solution: SlSolution {
            eigenvalues,
            eigenfunctions,
            centers,
            widths,
            normalized: true,
        },
    })
}

/// First positive Neumann eigenvalue of the cap, μ₁₁, together with the gap
/// μ₀₂ − μ₁₁ to the nearest competitor. The ordering μ₁₁ < μ₀₂ holds for all
/// R ∈ (0, π); its failure would mean the solver itself is broken.
pub fn cap_mu2_with_gap(radius: f64) -> Result<(f64, f64)> {
    let mode1 = solve_cap_mode(radius, 1, 1)?;
    let mode0 = solve_cap_mode(radius, 0, 2)?;
    let mu11 = mode1.eigenvalue(0);
    let mu02 = mode0.eigenvalue(1);
    if mu11 >= mu02 {
        return Err(Error::ModeOrdering { first: mu11, second: mu02 });
    }
    Ok((mu11, mu02 - mu11))
}

/// First positive Neumann eigenvalue μ₂ of the cap of radius R.
pub fn cap_mu2(radius: f64) -> Result<f64> {
    cap_mu2_with_gap(radius).map(|(mu, _)| mu)
}

/// The rational function
///
///   g(x) = (2x² − 3x + 3) / (x (3 − 2x)),
///
/// defined on (0, 3/2); g(sin²(R/2)) is the mode-1 Rayleigh quotient of the
/// trial function sin r on the cap of radius R, so μ₁₁(R) ≤ g(sin²(R/2)).
/// Exact values: g(1/2) = g(1) = 2, g(3/4) = 5/3 (the minimum).
pub fn g_ratio(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.5) {
        return Err(Error::RatioArgument { x });
    }
    Ok((2.0 * x * x - 3.0 * x + 3.0) / (x * (3.0 - 2.0 * x)))
}

/// Discrete mode-`mode` Rayleigh quotient of a trial function on the cap,
/// with the same flux discretization as the solver plus trapezoid boundary
/// edges, so smooth trial functions integrate to second order.
pub fn rayleigh_cap_mode(radius: f64, mode: u32, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = radius / n as f64;
    let centers: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let v: Vec<f64> = centers.iter().map(|&r| f(r)).collect();
    let ell2 = (mode as f64).powi(2);
    let mut num = 0.0;
    for i in 0..n - 1 {
        let df = (v[i + 1] - v[i]) / h;
        num += ((i as f64 + 1.0) * h).sin() * df * df * h;
    }
    // Boundary strips: sin(0) = 0 kills the left edge; the right edge uses a
    // one-sided difference.
    let df_right = (v[n - 1] - v[n - 2]) / h;
    num += 0.5 * h * radius.sin() * df_right * df_right;
    let mut den = 0.0;
    for i in 0..n {
        let s = centers[i].sin();
        if mode > 0 {
            num += ell2 / s * v[i] * v[i] * h;
        }
        den += s * v[i] * v[i] * h;
    }
    num / den
}

/// Compares the boundary perturbation identity dμ₀ⱼ/dR = −μ·v(R)²·sin R
/// against a central finite difference in R. Returns (identity, difference
/// quotient); j ≥ 2 indexes the excited states (j = 1 is the constant mode
/// with μ = 0, where both sides vanish).
pub fn mu0j_derivative_check(radius: f64, j: usize, n: usize) -> Result<(f64, f64)> {
    assert!(j >= 1);
    let spectrum = solve_cap_mode_n(radius, 0, j, n)?;
    let mu = spectrum.eigenvalue(j - 1);
    let v_boundary = spectrum.boundary_value(j - 1);
    let identity = -mu * v_boundary * v_boundary * radius.sin();

    let step = 1e-4;
    let plus = solve_cap_mode_n(radius + step, 0, j, n)?.eigenvalue(j - 1);
    let minus = solve_cap_mode_n(radius - step, 0, j, n)?.eigenvalue(j - 1);
    let quotient = (plus - minus) / (2.0 * step);
    Ok((identity, quotient))
}
