//! Conformal disk models of simply connected spherical domains.
//!
//! A domain Ω ⊂ S² is represented by an analytic map F from the unit disk
//! into the stereographic plane; pulling the round metric back through F
//! gives the conformal density
//!
//!   ρ²(z) = |F'(z)|² · 4 / (1 + |F(z)|²)²,
//!
//! so that (𝔻, ρ² |dz|²) is isometric to Ω. Recentering by a Möbius
//! automorphism moves the conformal pole without changing the geometry:
//!
//!   ρ_q²(z) = ρ²((z + q)/(1 + q̄ z)) · (1 − |q|²)² / |1 + q̄ z|⁴,
//!
//! which preserves the total mass M = ∫ ρ_q². The angular mean
//! ρ̃_q²(r) = (1/2π) ∫ ρ_q²(r e^{iθ}) dθ, the ring mass m(r) = 2π ρ̃_q²(r),
//! and the cumulative area s_q(r) = ∫_{B(0,r)} ρ_q² feed the radial spectral
//! problems; the isoperimetric profile of the radialized density is
//!
//!   G(s_q(r)) = 2π r² m(r),
//!
//! evaluated here on a cell-centered area grid by inverting s_q.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::quad::{angular_mean, GaussLegendre};

/// Default radial quadrature nodes.
pub const DEFAULT_N_R: usize = 256;
/// Default angular quadrature nodes.
pub const DEFAULT_N_THETA: usize = 256;
/// Below this modulus, F' counts as degenerate.
pub const DERIVATIVE_GUARD: f64 = 1e-12;
/// Samples used for the cumulative-area interpolant.
const AREA_SAMPLES: usize = 2048;
/// Relative agreement required between a quadrature value and its refinement.
const AREA_REFINEMENT_RTOL: f64 = 1e-8;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Polynomial analytic map F(z) = c₀ + Σ_{k≥1} c_k z^k with c₁ ≠ 0.
///
/// The constant term is zero for maps built from plain coefficient lists; it
/// becomes nonzero when a model is precomposed with a disk automorphism (see
/// [`AnalyticMap::shifted_cap`]), which reparametrizes the same domain.
#[derive(Debug, Clone)]
pub struct AnalyticMap {
    constant: Complex64,
    coefficients: Vec<Complex64>,
}

impl AnalyticMap {
    /// Map with coefficients (c₁, …, c_d) and no constant term.
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        Self::with_constant(Complex64::new(0.0, 0.0), coefficients)
    }

    pub fn with_constant(constant: Complex64, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.first().map_or(true, |c| c.norm() == 0.0) {
            return Err(Error::DegenerateLeadingCoefficient);
        }
        Ok(Self { constant, coefficients })
    }

    /// F(z) = c z, the centered model of a geodesic cap. The cap has geodesic
    /// radius 2 atan(c) and area 4πc²/(1 + c²).
    pub fn cap(c: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(c, 0.0)])
    }

    /// The cap model precomposed with the disk automorphism
    /// z ↦ (z + shift)/(1 + conj(shift) z), expanded as a power series and
    /// truncated at machine precision. The image domain is the same cap, but
    /// its balanced conformal pole moves to −shift.
    pub fn shifted_cap(c: f64, shift: Complex64) -> Result<Self> {
        let a = shift;
        if a.norm() >= 1.0 {
            return Err(Error::PoleOutsideDisk { q: a });
        }
        if a.norm() == 0.0 {
            return Self::cap(c);
        }
        // (z + a)/(1 + ā z) = a + (1 − |a|²) Σ_{k≥1} (−ā)^{k−1} z^k.
        let scale = c * (1.0 - a.norm_sqr());
        let base = -a.conj();
        let mut coefficients = Vec::new();
        let mut term = Complex64::new(scale, 0.0);
        for _ in 0..1024 {
            coefficients.push(term);
            term *= base;
            if term.norm() < 1e-18 * scale.abs() {
                break;
            }
        }
        Self::with_constant(c * a, coefficients)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coefficients.iter().rev() {
            acc = acc * z + c;
        }
        acc * z + self.constant
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in self.coefficients.iter().enumerate().rev() {
            acc = acc * z + c * (k + 1) as f64;
        }
        acc
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len()
    }

    /// Coefficients (c₁, …, c_d), excluding the constant term.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn constant(&self) -> Complex64 {
        self.constant
    }
}

/// Conformal factor ρ²(z) of the pulled-back round metric, with the
/// degeneracy guard applied.
pub fn conformal_factor(map: &AnalyticMap, z: Complex64) -> Result<f64> {
    let d = map.derivative(z);
    let modulus = d.norm();
    if modulus <= DERIVATIVE_GUARD {
        return Err(Error::DegenerateDerivative { z, modulus });
    }
    Ok(rho2_unchecked(map, z))
}

fn rho2_unchecked(map: &AnalyticMap, z: Complex64) -> f64 {
    let f = map.eval(z);
    let d = map.derivative(z);
    d.norm_sqr() * 4.0 / (1.0 + f.norm_sqr()).powi(2)
}

/// A domain presented as (𝔻, ρ² |dz|²), with its total area computed and
/// validated at construction.
#[derive(Debug, Clone)]
pub struct ConformalDomain {
    map: AnalyticMap,
    n_r: usize,
    n_theta: usize,
    area: f64,
}

impl ConformalDomain {
    pub fn new(map: AnalyticMap, n_r: usize, n_theta: usize) -> Result<Self> {
        assert!(n_r >= 8 && n_theta >= 8, "quadrature resolution too small");
        // Nondegeneracy of F' on the closed disk is checked on the quadrature
        // grid plus the boundary circle; univalence is the caller's contract.
        let gl = GaussLegendre::new(n_r);
        for (r, _) in gl.mapped(0.0, 1.0) {
            for j in 0..n_theta {
                let theta = TWO_PI * j as f64 / n_theta as f64;
                let z = Complex64::from_polar(r, theta);
                conformal_factor(&map, z)?;
            }
        }
        for j in 0..n_theta {
            let theta = TWO_PI * j as f64 / n_theta as f64;
            conformal_factor(&map, Complex64::from_polar(1.0, theta))?;
        }

        let area = area_quadrature(&map, n_r, n_theta);
        let refined = area_quadrature(&map, 2 * n_r, 2 * n_theta);
        let delta = (area - refined).abs();
        if delta > AREA_REFINEMENT_RTOL * area.abs().max(1e-300) {
            return Err(Error::QuadratureResolution { what: "domain area", delta });
        }
        if !(area > 0.0 && area < FOUR_PI) {
            return Err(Error::AreaOutOfRange { area });
        }
        Ok(Self { map, n_r, n_theta, area })
    }

    pub fn with_default_resolution(map: AnalyticMap) -> Result<Self> {
        Self::new(map, DEFAULT_N_R, DEFAULT_N_THETA)
    }

    /// Total spherical area M = ∫_𝔻 ρ².
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn map(&self) -> &AnalyticMap {
        &self.map
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.n_r, self.n_theta)
    }

    /// Pointwise density, without the per-call derivative guard (the guard
    /// ran over the quadrature grid at construction).
    pub fn rho2(&self, z: Complex64) -> f64 {
        rho2_unchecked(&self.map, z)
    }

    /// Density recentered so the conformal pole sits at Φ(q).
    pub fn recentered(&self, q: Complex64) -> Result<RecenteredDensity<'_>> {
        RecenteredDensity::new(self, q)
    }
}

fn area_quadrature(map: &AnalyticMap, n_r: usize, n_theta: usize) -> f64 {
    let gl = GaussLegendre::new(n_r);
    gl.integrate(0.0, 1.0, |r| {
        TWO_PI * r * angular_mean(n_theta, |theta| {
            rho2_unchecked(map, Complex64::from_polar(r, theta))
        })
    })
}

enum Source<'a> {
    Conformal(&'a ConformalDomain),
    Uniform,
}

/// Möbius-recentered density ρ_q² together with its radialization.
///
/// The uniform variant (ρ² ≡ 1, the flat unit disk) exists so the whole
/// radial pipeline can be exercised against Euclidean closed forms.
pub struct RecenteredDensity<'a> {
    source: Source<'a>,
    q: Complex64,
    n_r: usize,
    n_theta: usize,
    mass: f64,
    area_interp: OnceLock<MonotoneCubic>,
}

impl<'a> RecenteredDensity<'a> {
    pub fn new(domain: &'a ConformalDomain, q: Complex64) -> Result<Self> {
        Self::build(Source::Conformal(domain), q, domain.n_r, domain.n_theta)
    }

    /// The flat unit disk (ρ² ≡ 1), centered.
    pub fn euclidean_disk(n_r: usize, n_theta: usize) -> Result<RecenteredDensity<'static>> {
        RecenteredDensity::build(Source::Uniform, Complex64::new(0.0, 0.0), n_r, n_theta)
    }

    /// The flat unit disk recentered at q.
    pub fn euclidean_disk_at(
        q: Complex64,
        n_r: usize,
        n_theta: usize,
    ) -> Result<RecenteredDensity<'static>> {
        RecenteredDensity::build(Source::Uniform, q, n_r, n_theta)
    }

    fn build(source: Source<'a>, q: Complex64, n_r: usize, n_theta: usize) -> Result<Self> {
        if q.norm() >= 1.0 || !q.norm().is_finite() {
            return Err(Error::PoleOutsideDisk { q });
        }
        let mut density = Self {
            source,
            q,
            n_r,
            n_theta,
            mass: 0.0,
            area_interp: OnceLock::new(),
        };
        let gl = GaussLegendre::new(n_r);
        let mass = gl.integrate(0.0, 1.0, |r| density.ring_mass(r) * r);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::AreaOutOfRange { area: mass });
        }
        density.mass = mass;
        Ok(density)
    }

    pub fn pole(&self) -> Complex64 {
        self.q
    }

    /// Total mass M = ∫_𝔻 ρ_q², equal to the domain area for every pole.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.n_r, self.n_theta)
    }

    /// Pointwise recentered density ρ_q²(z).
    pub fn rho2(&self, z: Complex64) -> f64 {
        let q = self.q;
        if q.norm_sqr() == 0.0 {
            return self.base_rho2(z);
        }
        let denom = Complex64::new(1.0, 0.0) + q.conj() * z;
        let w = (z + q) / denom;
        let jacobian = (1.0 - q.norm_sqr()).powi(2) / denom.norm_sqr().powi(2);
        self.base_rho2(w) * jacobian
    }

    fn base_rho2(&self, z: Complex64) -> f64 {
        match self.source {
            Source::Conformal(domain) => domain.rho2(z),
            Source::Uniform => 1.0,
        }
    }

    /// Angular node count actually used at radius r. The recentered density
    /// is the restriction of an analytic function whose nearest singularity
    /// sits at distance ≈ (1 − |q| r) from the sampling circle, so the
    /// trapezoid rule needs more nodes as |q| r → 1.
    pub fn effective_n_theta(&self, r: f64) -> usize {
        let closeness = 1.0 - self.q.norm() * r.abs().min(1.0);
        let needed = (48.0 / closeness.max(1e-6)) as usize;
        self.n_theta.max(needed.min(1 << 17))
    }

    /// Radialized weight ρ̃_q²(r), the angular mean of ρ_q² at radius r.
    pub fn radialized(&self, r: f64) -> f64 {
        let n = self.effective_n_theta(r);
        angular_mean(n, |theta| self.rho2(Complex64::from_polar(r, theta)))
    }

    /// Ring mass m(r) = ∫_0^{2π} ρ_q²(r e^{iθ}) dθ = 2π ρ̃_q²(r).
    pub fn ring_mass(&self, r: f64) -> f64 {
        TWO_PI * self.radialized(r)
    }

    /// m-th angular Fourier coefficient ∫_0^{2π} ρ_q²(r e^{iθ}) e^{−imθ} dθ.
    /// Mode 0 is the ring mass.
    pub fn fourier_mode(&self, mode: i32, r: f64) -> Complex64 {
        let n = self.effective_n_theta(r);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let theta = TWO_PI * j as f64 / n as f64;
            let weight = self.rho2(Complex64::from_polar(r, theta));
            acc += weight * Complex64::from_polar(1.0, -(mode as f64) * theta);
        }
        acc * TWO_PI / n as f64
    }

    /// Cumulative area s_q(r) = ∫_{B(0,r)} ρ_q², by direct quadrature.
    pub fn cumulative_area(&self, r: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::RadiusOutOfRange { radius: r, range: "[0, 1]" });
        }
        let gl = GaussLegendre::new(self.n_r);
        Ok(gl.integrate(0.0, r, |s| self.ring_mass(s) * s))
    }

    /// Strictly increasing interpolant of r ↦ s_q(r), built once. Cumulative
    /// sums run over a radial grid that is geometrically refined toward the
    /// boundary when the pole is close to it.
    fn area_interpolant(&self) -> Result<&MonotoneCubic> {
        if let Some(interp) = self.area_interp.get() {
            return Ok(interp);
        }
        let grid = self.sample_grid();
        let gl = GaussLegendre::new(8);
        let mut values = Vec::with_capacity(grid.len());
        values.push(0.0);
        let mut total = 0.0;
        for w in grid.windows(2) {
            total += gl.integrate(w[0], w[1], |s| self.ring_mass(s) * s);
            values.push(total);
        }
        let interp = MonotoneCubic::fit(grid, values)?;
        Ok(self.area_interp.get_or_init(|| interp))
    }

    fn sample_grid(&self) -> Vec<f64> {
        let qn = self.q.norm();
        if qn < 0.99 {
            return (0..=AREA_SAMPLES).map(|i| i as f64 / AREA_SAMPLES as f64).collect();
        }
        // Half the samples resolve the boundary layer of width ~(1 − |q|)|log(1 − |q|)|.
        let layer = (30.0 * (1.0 - qn) * (1.0 - qn).ln().abs().max(1.0)).min(0.25);
        let split = 1.0 - layer;
        let half = AREA_SAMPLES / 2;
        let mut grid: Vec<f64> = (0..half).map(|i| split * i as f64 / half as f64).collect();
        grid.extend((0..=half).map(|i| split + layer * i as f64 / half as f64));
        grid
    }

    /// Radius r with s_q(r) = a, by bisection on the monotone interpolant.
    pub fn invert_area(&self, a: f64) -> Result<f64> {
        let interp = self.area_interpolant()?;
        let (_, total) = interp.range();
        if !(0.0..=total * (1.0 + 1e-9)).contains(&a) {
            return Err(Error::RadiusOutOfRange { radius: a, range: "[0, M]" });
        }
        Ok(interp.invert(a))
    }

    /// Isoperimetric profile of the radialized density on the cell-centered
    /// area grid a_i = (i + ½) M/n: G(a_i) = 2π r_i² m(r_i) with s_q(r_i) = a_i.
    pub fn profile(&self, n: usize) -> Result<ProfileFunction> {
        assert!(n >= 2);
        let interp = self.area_interpolant()?;
        let (_, total) = interp.range();
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let a = (i as f64 + 0.5) * total / n as f64;
            let r = interp.invert(a);
            let g = TWO_PI * r * r * self.ring_mass(r);
            values.push(g);
        }
        ProfileFunction::from_samples(total, values)
    }

    /// Length of the level curve {s_q = a}: the circle of radius r_a in the
    /// recentered chart, measured in the density metric.
    pub fn level_curve_length(&self, a: f64) -> Result<f64> {
        let r = self.invert_area(a)?;
        let n = self.effective_n_theta(r);
        let mean = angular_mean(n, |theta| {
            self.rho2(Complex64::from_polar(r, theta)).sqrt()
        });
        Ok(TWO_PI * r * mean)
    }
}

/// Isoperimetric profile G sampled on the cell-centered grid
/// a_i = (i + ½) M/n. Strictly positive on (0, M) by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileFunction {
    total_area: f64,
    values: Vec<f64>,
}

impl ProfileFunction {
    pub fn from_samples(total_area: f64, values: Vec<f64>) -> Result<Self> {
        if !(total_area > 0.0 && total_area < FOUR_PI) {
            return Err(Error::AreaOutOfRange { area: total_area });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveProfile { index, value });
            }
        }
        assert!(values.len() >= 2);
        Ok(Self { total_area, values })
    }

    /// Profile of the geodesic cap of area M: G(a) = a(4π − a).
    pub fn cap(total_area: f64, n: usize) -> Result<Self> {
        Self::analytic(total_area, n, |a| a * (FOUR_PI - a))
    }

    /// Profile of the flat disk of area M: G(a) = 4πa.
    pub fn euclidean(total_area: f64, n: usize) -> Result<Self> {
        Self::analytic(total_area, n, |a| FOUR_PI * a)
    }

    /// Samples an arbitrary closed-form profile on the cell-centered grid.
    pub fn analytic<F: Fn(f64) -> f64>(total_area: f64, n: usize, g: F) -> Result<Self> {
        assert!(n >= 2);
        let values = (0..n)
            .map(|i| g((i as f64 + 0.5) * total_area / n as f64))
            .collect();
        Self::from_samples(total_area, values)
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_width(&self) -> f64 {
        self.total_area / self.values.len() as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.cell_width()
    }

    /// Flux coefficient at the interior cell edge between cells i and i+1.
    pub fn edge_value(&self, i: usize) -> f64 {
        0.5 * (self.values[i] + self.values[i + 1])
    }

    /// True when both grids agree in node count and total area.
    pub fn compatible(&self, other: &Self) -> bool {
        self.len() == other.len()
            && (self.total_area - other.total_area).abs() <= 1e-12 * self.total_area
    }
}
