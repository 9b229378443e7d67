//! Shared fixtures for the solver benchmarks: representative domains at
//! bench-sized quadrature resolutions.

use capspec_core::domain::ConformalDomain;
use capspec_core::verify::DomainSpec;

/// Hemisphere model (the identity map), the equality case of every
/// comparison in the suite.
pub fn hemisphere(quadrature: usize) -> ConformalDomain {
    let spec = DomainSpec { coefficients: vec![[1.0, 0.0]], constant: None };
    ConformalDomain::new(spec.map().unwrap(), quadrature, quadrature).unwrap()
}

/// Quadratically perturbed domain, the generic (strict-inequality) case.
pub fn bumped(eps: f64, quadrature: usize) -> ConformalDomain {
    let spec = DomainSpec {
        coefficients: vec![[1.0, 0.0], [eps, 0.0]],
        constant: None,
    };
    ConformalDomain::new(spec.map().unwrap(), quadrature, quadrature).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build_with_expected_masses() {
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!((hemisphere(64).area() - two_pi).abs() < 1e-10);
        assert!(bumped(0.1, 64).area() > two_pi);
    }
}
