//! Cross-module checks through the public API only, on a domain with
//! genuinely complex coefficients — the unit suites lean on real,
//! axially symmetric families, so this is where asymmetry gets exercised.

use capspec_core::barycenter::find_balanced_pole;
use capspec_core::domain::ConformalDomain;
use capspec_core::radial::{solve_radial_weighted, solve_sl_profile};
use capspec_core::verify::{isoperimetric_profile_check, verify_chain, DomainSpec, VerifyConfig};
use num_complex::Complex64;

/// F(z) = z + (0.12 + 0.08i) z² + (0.03 − 0.02i) z³: no axis of symmetry,
/// so nothing cancels by parity.
fn asymmetric_spec() -> DomainSpec {
    DomainSpec {
        coefficients: vec![[1.0, 0.0], [0.12, 0.08], [0.03, -0.02]],
        constant: None,
    }
}

fn asymmetric_config() -> VerifyConfig {
    VerifyConfig::from_json(
        r#"{"domain": {"coefficients": [[1.0, 0.0], [0.12, 0.08], [0.03, -0.02]]},
            "resolutions": {"rings": 32, "sl_grid": 512, "n_r": 128, "n_theta": 128}}"#,
    )
    .unwrap()
}

fn asymmetric_domain() -> ConformalDomain {
    ConformalDomain::new(asymmetric_spec().map().unwrap(), 128, 128).unwrap()
}

#[test]
fn identity_recentering_changes_nothing() {
    let domain = asymmetric_domain();
    let density = domain.recentered(Complex64::new(0.0, 0.0)).unwrap();
    for &(re, im) in &[(0.0, 0.0), (0.3, -0.4), (-0.7, 0.1), (0.05, 0.9)] {
        let z = Complex64::new(re, im);
        assert_eq!(
            density.rho2(z),
            domain.rho2(z),
            "identity recentering must evaluate the same arithmetic at {z}"
        );
    }
}

#[test]
fn chain_holds_for_an_asymmetric_domain() {
    let report = verify_chain(&asymmetric_config()).unwrap();
    assert!(report.verdict, "{report:?}");
    assert_eq!(report.pole_winding, 1);
    // The pole inherits the domain's asymmetry; it must leave both axes.
    assert!(report.balanced_pole[0].abs() > 1e-4);
    assert!(report.balanced_pole[1].abs() > 1e-4);
    let gap = report.mu2_cap - report.mu2_domain;
    assert!(
        gap > report.eps_tot,
        "asymmetric domain is no cap: gap {gap} vs eps_tot {}",
        report.eps_tot
    );
}

#[test]
fn weighted_and_profile_forms_agree_at_the_balanced_pole() {
    let domain = asymmetric_domain();
    let tol = 1e-6 * domain.area().sqrt();
    let pole = find_balanced_pole(&domain, 512, tol).unwrap().pole;
    let density = domain.recentered(pole).unwrap();

    let weighted = solve_radial_weighted(&density, 1024, 1).unwrap().eigenvalues[0];
    let profile = density.profile(1024).unwrap();
    let through_profile = solve_sl_profile(&profile, 1).unwrap().eigenvalues[0];

    // The profile form discretizes the same operator after the area change
    // of variables; it converges slower, so the match is loose but real.
    let rel = (weighted - through_profile).abs() / weighted;
    assert!(
        rel < 2e-2,
        "weighted {weighted} vs profile-form {through_profile} (rel {rel:.2e})"
    );
}

#[test]
fn sandwich_holds_at_complex_poles() {
    let domain = asymmetric_domain();
    for &(re, im) in &[(0.3, 0.4), (-0.5, -0.1)] {
        let rows =
            isoperimetric_profile_check(&domain, Complex64::new(re, im), 96).unwrap();
        assert_eq!(rows.len(), 96);
    }
}
