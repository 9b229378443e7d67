//! Radial Sturm–Liouville reductions of the weighted Neumann problem.
//!
//! Two equivalent forms are solved, both by a flux-conservative
//! finite-volume scheme on a cell-centered grid (second order, symmetric):
//!
//! * the profile form on (0, M), in the area variable a:
//!
//!   −(G f′)′ + (4π²/G) f = κ f,   lim_{a→0} G f′ = 0,  f′(M) = 0,
//!
//! * the weighted form on (0, 1), in the conformal radius r:
//!
//!   −v″ − v′/r + (ℓ²/r²) v = κ ρ̃_q²(r) v,   lim_{r→0} r v′ = 0,  v′(1) = 0,
//!
//! with ℓ = 1 the physically relevant angular mode. The pullback f(s_q(r)) =
//! v(r) identifies the two lowest eigenvalues when G is the profile of ρ̃_q².
//!
//! The first eigenvalue is differentiable along linear profile families
//! G_t = (1−t)G₀ + tG₁, with
//!
//!   dκ₁/dt = ∫ (G_t² f′² − 4π² f²) (G₁ − G₀) / G_t² da,
//!
//! which the discrete scheme reproduces exactly (the formula below is the
//! derivative of the discrete quadratic form), so a finite-difference check
//! against it validates the whole eigenvalue path.

use num_complex::Complex64;

use crate::domain::{ProfileFunction, RecenteredDensity};
use crate::error::{Error, Result};
use crate::tridiag::{lowest_generalized, SymTridiag};

const FOUR_PI2: f64 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;

/// Relative movement of κ₁ under grid halving beyond which the grid is
/// rejected as too coarse.
const COARSE_RTOL: f64 = 1e-2;

/// Eigenpairs of a radial Sturm–Liouville problem on its finite-volume grid.
///
/// Eigenfunctions are sampled at cell centers. When `normalized` is set they
/// carry unit norm in the solver's mass measure: ∫ f² da = 1 for the profile
/// form, ∫_𝔻 v² ρ_q² dv = 1 for the weighted form (the same number under the
/// change of variables a = s_q(r)).
#[derive(Debug, Clone)]
pub struct SlSolution {
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<Vec<f64>>,
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
    pub normalized: bool,
}

impl SlSolution {
    pub fn n(&self) -> usize {
        self.centers.len()
    }
}

/// Canonical sign: the ground state is positive; excited states are positive
/// at the outermost node, tie-broken by the last node exceeding the sign
/// threshold.
fn fix_signs(vectors: &mut [Vec<f64>]) {
    for (k, v) in vectors.iter_mut().enumerate() {
        let pivot = if k == 0 {
            v.iter().sum::<f64>()
        } else {
            let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            v.iter()
                .rev()
                .find(|x| x.abs() > 1e-8 * scale)
                .copied()
                .unwrap_or(0.0)
        };
        if pivot < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// Solves the pencil assembled from per-edge flux couplings `flux_e`
/// (already divided by the center gap), per-cell potential masses `pot`
/// (Q_i·h_i), and per-cell mass weights `mass` (W_i·h_i).
///
/// Eigenvalues are polished with the flux-form Rayleigh quotient of the
/// computed vector: every term in that quotient is nonnegative, so it avoids
/// the cancellation floor of bisection on the stiffness-scaled pencil and
/// resolves the low eigenvalues to near machine relative precision — which
/// downstream difference quotients in domain parameters rely on.
pub(crate) fn solve_flux_assembled(
    flux_e: &[f64],
    pot: &[f64],
    mass: &[f64],
    count: usize,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = pot.len();
    assert_eq!(flux_e.len() + 1, n);
    assert_eq!(mass.len(), n);
    let mut diag = pot.to_vec();
    let mut off = vec![0.0; n - 1];
    for i in 0..n - 1 {
        diag[i] += flux_e[i];
        diag[i + 1] += flux_e[i];
        off[i] = -flux_e[i];
    }
    let a = SymTridiag::new(diag, off);
    let (mut values, mut vectors) = lowest_generalized(&a, mass, count);
    for (value, v) in values.iter_mut().zip(&vectors) {
        let mut num = 0.0;
        for i in 0..n - 1 {
            let d = v[i + 1] - v[i];
            num += flux_e[i] * d * d;
        }
        let mut den = 0.0;
        for i in 0..n {
            num += pot[i] * v[i] * v[i];
            den += mass[i] * v[i] * v[i];
        }
        *value = num / den;
    }
    fix_signs(&mut vectors);
    (values, vectors)
}

/// Assembles and solves the generic flux-form pencil on a cell grid.
///
/// `flux` is sampled at interior cell edges, `potential` and `mass` at cell
/// centers; zero flux is imposed at both outer edges. Values are the
/// per-point coefficients P, Q, W of −(P u′)′ + Q u = λ W u.
pub(crate) fn solve_flux_form(
    edges: &[f64],
    flux: impl Fn(f64) -> f64,
    potential: impl Fn(f64) -> f64,
    mass: impl Fn(f64) -> f64,
    count: usize,
) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let n = edges.len() - 1;
    let centers: Vec<f64> = (0..n).map(|i| 0.5 * (edges[i] + edges[i + 1])).collect();
    let widths: Vec<f64> = (0..n).map(|i| edges[i + 1] - edges[i]).collect();
    let flux_e: Vec<f64> = (0..n - 1)
        .map(|i| flux(edges[i + 1]) / (centers[i + 1] - centers[i]))
        .collect();
    let pot: Vec<f64> = (0..n).map(|i| potential(centers[i]) * widths[i]).collect();
    let w: Vec<f64> = (0..n).map(|i| mass(centers[i]) * widths[i]).collect();
    let (values, vectors) = solve_flux_assembled(&flux_e, &pot, &w, count);
    (values, vectors, centers, widths)
}

pub(crate) fn uniform_edges(length: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| length * i as f64 / n as f64).collect()
}

/// Lowest `count` eigenpairs of the profile form on (0, M).
///
/// The grid is the profile's own cell-centered grid; edge fluxes average the
/// two adjacent samples. Fails with [`Error::GridTooCoarse`] when κ₁ moves
/// by more than 1% under grid halving.
pub fn solve_sl_profile(profile: &ProfileFunction, count: usize) -> Result<SlSolution> {
    assert!(count >= 1);
    let n = profile.len();
    let m = profile.total_area();
    let g = profile.values();
    let h = profile.cell_width();

    let solve = |g: &[f64], h: f64, count: usize| -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = g.len();
        let flux_e: Vec<f64> = (0..n - 1).map(|i| 0.5 * (g[i] + g[i + 1]) / h).collect();
        let pot: Vec<f64> = (0..n).map(|i| FOUR_PI2 / g[i] * h).collect();
        solve_flux_assembled(&flux_e, &pot, &vec![h; n], count)
    };

    let (values, vectors) = solve(g, h, count);

    if n >= 32 && n % 2 == 0 {
        let coarse_g: Vec<f64> = (0..n / 2).map(|i| 0.5 * (g[2 * i] + g[2 * i + 1])).collect();
        let (cv, _) = solve(&coarse_g, 2.0 * h, 1);
        if (cv[0] - values[0]).abs() > COARSE_RTOL * values[0].abs().max(1e-12) {
            return Err(Error::GridTooCoarse { coarse: cv[0], fine: values[0] });
        }
    }

    Ok(SlSolution {
        eigenvalues: values,
        eigenfunctions: vectors,
        centers: (0..n).map(|i| (i as f64 + 0.5) * m / n as f64).collect(),
        widths: vec![h; n],
        normalized: true,
    })
}

/// Lowest `count` eigenpairs of the weighted form on (0, 1) in angular mode
/// ℓ = 1, the sector containing the first positive Neumann eigenvalue.
pub fn solve_radial_weighted(
    density: &RecenteredDensity<'_>,
    n: usize,
    count: usize,
) -> Result<SlSolution> {
    solve_radial_weighted_mode(density, 1, n, count)
}

/// Weighted form in a general angular mode ℓ ≥ 1 (potential ℓ²/r²). Higher
/// modes feed the Steklov concentration check, whose ℓ-th sector limit is
/// 2πℓ/M.
pub fn solve_radial_weighted_mode(
    density: &RecenteredDensity<'_>,
    mode: u32,
    n: usize,
    count: usize,
) -> Result<SlSolution> {
    assert!(count >= 1 && mode >= 1);
    assert!(n >= 16 && n % 2 == 0, "weighted solver wants an even grid of at least 16 cells");
    let edges = radial_edges(density, n);
    let ell2 = (mode as f64).powi(2);

    let weights: Vec<f64> = {
        let mut w = Vec::with_capacity(n);
        for i in 0..n {
            let c = 0.5 * (edges[i] + edges[i + 1]);
            let rho = density.radialized(c);
            if !(rho > 0.0) {
                return Err(Error::NonPositiveWeight { x: c, y: 0.0 });
            }
            w.push(rho);
        }
        w
    };

    let solve = |edges: &[f64], weights: &[f64], count: usize| {
        let n = edges.len() - 1;
        let centers: Vec<f64> = (0..n).map(|i| 0.5 * (edges[i] + edges[i + 1])).collect();
        let widths: Vec<f64> = (0..n).map(|i| edges[i + 1] - edges[i]).collect();
        let flux_e: Vec<f64> = (0..n - 1)
            .map(|i| edges[i + 1] / (centers[i + 1] - centers[i]))
            .collect();
        let pot: Vec<f64> = (0..n).map(|i| ell2 / centers[i] * widths[i]).collect();
        let w: Vec<f64> = (0..n).map(|i| weights[i] * centers[i] * widths[i]).collect();
        solve_flux_assembled(&flux_e, &pot, &w, count)
    };

    let (values, mut vectors) = solve(&edges, &weights, count);

    // Coarseness check on the pairwise-merged grid.
    let coarse_edges: Vec<f64> = edges.iter().copied().step_by(2).collect();
    let coarse_weights: Vec<f64> = (0..n / 2)
        .map(|i| {
            let c = 0.5 * (coarse_edges[i] + coarse_edges[i + 1]);
            density.radialized(c)
        })
        .collect();
    let (cv, _) = solve(&coarse_edges, &coarse_weights, 1);
    if (cv[0] - values[0]).abs() > COARSE_RTOL * values[0].abs().max(1e-12) {
        return Err(Error::GridTooCoarse { coarse: cv[0], fine: values[0] });
    }

    // Rescale to unit mass in L²(𝔻, ρ_q²): the pencil normalization gives
    // ∫ v² ρ̃² r dr = 1, which is 1/(2π) of the disk integral.
    let scale = (2.0 * std::f64::consts::PI).sqrt();
    for v in vectors.iter_mut() {
        for x in v.iter_mut() {
            *x /= scale;
        }
    }
    fix_signs(&mut vectors);

    let centers: Vec<f64> = (0..n).map(|i| 0.5 * (edges[i] + edges[i + 1])).collect();
    let widths: Vec<f64> = (0..n).map(|i| edges[i + 1] - edges[i]).collect();
    Ok(SlSolution {
        eigenvalues: values,
        eigenfunctions: vectors,
        centers,
        widths,
        normalized: true,
    })
}

/// Cell edges for the weighted solver. For poles near the boundary half the
/// cells move into the concentration layer at r = 1.
fn radial_edges(density: &RecenteredDensity<'_>, n: usize) -> Vec<f64> {
    let qn = density.pole().norm();
    if qn < 0.99 {
        return uniform_edges(1.0, n);
    }
    let layer = (30.0 * (1.0 - qn) * (1.0 - qn).ln().abs().max(1.0)).min(0.25);
    let split = 1.0 - layer;
    let half = n / 2;
    let mut edges: Vec<f64> = (0..half).map(|i| split * i as f64 / half as f64).collect();
    edges.extend((0..=half).map(|i| split + layer * i as f64 / half as f64));
    edges
}

/// Discrete Rayleigh quotient of the profile form for a trial function
/// sampled at the profile's cell centers:
///
///   [∫ G f′² + 4π² f²/G da] / [∫ f² da]
///
/// with midpoint-flux differences for f′ and trapezoid-weighted boundary
/// edges (one-sided differences, linearly extrapolated G).
pub fn rayleigh_profile(profile: &ProfileFunction, f: &[f64]) -> Result<f64> {
    let n = profile.len();
    if f.len() != n {
        return Err(Error::ProfileMismatch);
    }
    let g = profile.values();
    let h = profile.cell_width();
    let mut num = 0.0;
    for i in 0..n - 1 {
        let df = (f[i + 1] - f[i]) / h;
        num += 0.5 * (g[i] + g[i + 1]) * df * df * h;
    }
    let g_left = (1.5 * g[0] - 0.5 * g[1]).max(0.0);
    let g_right = (1.5 * g[n - 1] - 0.5 * g[n - 2]).max(0.0);
    let df_left = (f[1] - f[0]) / h;
    let df_right = (f[n - 1] - f[n - 2]) / h;
    num += 0.5 * h * (g_left * df_left * df_left + g_right * df_right * df_right);
    let mut den = 0.0;
    for i in 0..n {
        num += FOUR_PI2 * f[i] * f[i] / g[i] * h;
        den += f[i] * f[i] * h;
    }
    if den == 0.0 {
        return Err(Error::SignChange);
    }
    Ok(num / den)
}

/// Log-derivative ratio R(a) = G f′/f of a ground state, sampled at interior
/// nodes with centered differences. The continuum bound is |R| < 2π with
/// R(M) = 0; the discrete samples respect both away from rounding.
pub fn log_derivative_ratio(
    profile: &ProfileFunction,
    solution: &SlSolution,
) -> Result<Vec<(f64, f64)>> {
    let n = profile.len();
    let f = solution
        .eigenfunctions
        .first()
        .ok_or(Error::ProfileMismatch)?;
    if f.len() != n {
        return Err(Error::ProfileMismatch);
    }
    if f.iter().any(|&x| x <= 0.0) {
        return Err(Error::SignChange);
    }
    let g = profile.values();
    let h = profile.cell_width();
    let mut out = Vec::with_capacity(n - 2);
    for i in 1..n - 1 {
        let df = (f[i + 1] - f[i - 1]) / (2.0 * h);
        out.push((profile.center(i), g[i] * df / f[i]));
    }
    Ok(out)
}

/// Linear interpolation G_t = (1−t) G₀ + t G₁ of two compatible profiles.
pub fn blend_profiles(g0: &ProfileFunction, g1: &ProfileFunction, t: f64) -> Result<ProfileFunction> {
    if !g0.compatible(g1) {
        return Err(Error::ProfileMismatch);
    }
    let values: Vec<f64> = g0
        .values()
        .iter()
        .zip(g1.values())
        .map(|(&a, &b)| (1.0 - t) * a + t * b)
        .collect();
    ProfileFunction::from_samples(g0.total_area(), values)
}

/// dκ₁/dt along G_t = (1−t)G₀ + tG₁, evaluated from the ground state of G_t:
///
///   dκ₁/dt = ∫ (G_t² f′² − 4π² f²) (G₁ − G₀)/G_t² da.
///
/// The discretization mirrors the solver's quadratic form exactly (edge
/// fluxes for the gradient term, cell centers for the potential term), so
/// this is the exact derivative of the discrete eigenvalue.
pub fn feynman_hellmann_derivative(
    g0: &ProfileFunction,
    g1: &ProfileFunction,
    t: f64,
) -> Result<f64> {
    let gt = blend_profiles(g0, g1, t)?;
    let solution = solve_sl_profile(&gt, 1)?;
    let f = &solution.eigenfunctions[0];
    let n = gt.len();
    let h = gt.cell_width();
    let d0 = g0.values();
    let d1 = g1.values();
    let gtv = gt.values();
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let df = (f[i + 1] - f[i]) / h;
        let delta_edge = 0.5 * ((d1[i] - d0[i]) + (d1[i + 1] - d0[i + 1]));
        acc += delta_edge * df * df * h;
    }
    for i in 0..n {
        let delta = d1[i] - d0[i];
        acc -= FOUR_PI2 * f[i] * f[i] * delta / (gtv[i] * gtv[i]) * h;
    }
    Ok(acc)
}

/// Moment ∫_𝔻 v(|z|) e^{iθ} ρ_q² dv of the radial ground state against the
/// first angular harmonic — the integrand of the balanced-pole field.
///
/// The e^{iθ} factor is the m = −1 coefficient in the density's e^{−imθ}
/// Fourier convention. With the recentering automorphism (z + q)/(1 + q̄ z)
/// the density concentrates toward the boundary point −q as |q| → 1, so
/// this component (not its conjugate) satisfies the boundary asymptotics
/// V(q) → −√M q; equivalently it is the component whose winding on a probe
/// circle is +1.
pub fn first_mode_integral(
    density: &RecenteredDensity<'_>,
    solution: &SlSolution,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let v = &solution.eigenfunctions[0];
    for i in 0..solution.n() {
        let r = solution.centers[i];
        acc += v[i] * density.fourier_mode(-1, r) * r * solution.widths[i];
    }
    acc
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        /// Domain monotonicity of the profile eigenvalue: enlarging G can
        /// only lower κ₁.
        #[test]
        fn profile_monotonicity(bump in 0.01f64..0.5, center in 0.3f64..0.7, width in 0.05f64..0.2) {
            let m = TWO_PI;
            let g0 = ProfileFunction::cap(m, 512).unwrap();
            let g1 = ProfileFunction::analytic(m, 512, |a| {
                let x = (a / m - center) / width;
                a * (4.0 * std::f64::consts::PI - a) * (1.0 + bump * (-x * x).exp())
            }).unwrap();
            let k0 = solve_sl_profile(&g0, 1).unwrap().eigenvalues[0];
            let k1 = solve_sl_profile(&g1, 1).unwrap().eigenvalues[0];
            prop_assert!(k1 <= k0 + 1e-10, "κ₁ rose from {k0} to {k1}");
        }

        /// The ratio bound |R| < 2π holds across cap areas.
        #[test]
        fn ratio_bound_across_areas(m in 0.5f64..11.0) {
            let profile = ProfileFunction::cap(m, 1024).unwrap();
            let solution = solve_sl_profile(&profile, 1).unwrap();
            let ratio = log_derivative_ratio(&profile, &solution).unwrap();
            for &(_, r) in &ratio {
                prop_assert!(r.abs() < TWO_PI);
            }
        }
    }
}
