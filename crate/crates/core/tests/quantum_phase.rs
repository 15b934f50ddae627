use std::f64::consts::PI;

use abdeflect::dynamics::Direction;
use abdeflect::quantum_phase::{
    line_integral, path_phase, path_phase_in, quantum_deflection, symmetric_slit_paths, two_path_phase_difference,
    two_path_phase_difference_in, GaugeShifted, PathSpec, QuantumConfig, Side,
};
use abdeflect::{Solenoid, UnitSystem, Vec3};

fn units() -> UnitSystem {
    UnitSystem::new(100.0).unwrap()
}

fn sol() -> Solenoid {
    Solenoid::new(0.05, 1.0).unwrap()
}

fn path(points: &[(f64, f64)], side: Side) -> PathSpec {
    PathSpec::new(points.iter().map(|&(x, y)| Vec3::new(x, y, 0.0)).collect(), side, &sol()).unwrap()
}

fn ab_expected(q: f64, hbar: f64) -> f64 {
    q * sol().flux(&units()) / (hbar * units().c)
}

#[test]
fn symmetric_paths_give_flux_phase() {
    let qc = QuantumConfig::new(1.0, 1.0, 1.0).unwrap();
    let (l, r) = symmetric_slit_paths(&sol(), 0.2, 10.0).unwrap();
    let d = two_path_phase_difference(&l, &r, &qc, &sol(), 1.0, &units()).unwrap();
    assert!(d.encloses_flux);
    assert!(d.mechanical.abs() < 1e-12);
    assert!((d.total - ab_expected(1.0, 1.0)).abs() <= 1e-8 * ab_expected(1.0, 1.0));
}

#[test]
fn charge_sign_flips_phase() {
    let qc = QuantumConfig::new(1.0, 1.0, 1.0).unwrap();
    let (l, r) = symmetric_slit_paths(&sol(), 0.2, 10.0).unwrap();
    let plus = two_path_phase_difference(&l, &r, &qc, &sol(), 1.0, &units()).unwrap();
    let minus = two_path_phase_difference(&l, &r, &qc, &sol(), -1.0, &units()).unwrap();
    assert!((plus.aharonov_bohm + minus.aharonov_bohm).abs() <= 1e-15 * plus.aharonov_bohm.abs());
}

#[test]
fn deformed_enclosing_pairs() {
    let qc = QuantumConfig::new(1.0, 1.0, 1.0).unwrap();
    let expected = ab_expected(1.0, 1.0);
    let pairs = [
        (vec![(0.0, -3.0), (-0.1, 0.0), (0.0, 3.0)], vec![(0.0, -3.0), (0.1, 0.0), (0.0, 3.0)]),
        (vec![(0.0, -3.0), (-0.06, -0.1), (-0.06, 0.1), (0.0, 3.0)], vec![(0.0, -3.0), (1.0, 0.0), (0.0, 3.0)]),
        (vec![(0.0, -3.0), (-2.0, -1.0), (-0.3, 2.0), (0.0, 3.0)], vec![(0.0, -3.0), (0.2, -0.2), (0.07, 0.3), (0.0, 3.0)]),
        (vec![(1.0, -2.0), (-0.5, -0.5), (-0.5, 0.5), (1.0, 2.0)], vec![(1.0, -2.0), (1.0, 2.0)]),
        (vec![(0.0, -1.0), (-0.08, 0.0), (0.0, 1.0)], vec![(0.0, -1.0), (0.3, -0.3), (0.3, 0.3), (0.0, 1.0)]),
    ];
    for (l, r) in pairs {
        let d = two_path_phase_difference(&path(&l, Side::Left), &path(&r, Side::Right), &qc, &sol(), 1.0, &units()).unwrap();
        assert!(d.encloses_flux);
        assert!((d.aharonov_bohm - expected).abs() <= 1e-8 * expected, "{l:?} / {r:?}: {}", d.aharonov_bohm);
    }
}

#[test]
fn non_enclosing_pairs_have_no_flux_phase() {
    let qc = QuantumConfig::new(1.0, 1.0, 1.0).unwrap();
    let pairs = [
        (vec![(0.0, -3.0), (0.1, 0.0), (0.0, 3.0)], vec![(0.0, -3.0), (0.8, 0.0), (0.0, 3.0)]),
        (vec![(0.0, -3.0), (-0.1, 0.0), (0.0, 3.0)], vec![(0.0, -3.0), (-2.0, 0.5), (0.0, 3.0)]),
        (vec![(1.0, -1.0), (1.0, 1.0)], vec![(1.0, -1.0), (2.0, -0.5), (1.5, 0.7), (1.0, 1.0)]),
    ];
    for (a, b) in pairs {
        let d = two_path_phase_difference(&path(&a, Side::Left), &path(&b, Side::Right), &qc, &sol(), 1.0, &units()).unwrap();
        assert!(!d.encloses_flux);
        assert!(d.aharonov_bohm.abs() <= 1e-10, "{}", d.aharonov_bohm);
    }
}

#[test]
fn gauge_shift_leaves_difference_invariant() {
    let qc = QuantumConfig::new(1.0, 1.0, 1.0).unwrap();
    let (l, r) = symmetric_slit_paths(&sol(), 0.2, 4.0).unwrap();
    // chi = y sin(x) + 0.3 x^2 + 0.1 y^3
    let shifted = GaugeShifted {
        base: &sol(),
        gradient: |p: Vec3| Vec3::new(p.y * p.x.cos() + 0.6 * p.x, p.x.sin() + 0.3 * p.y * p.y, 0.0) * 0.01,
    };
    let plain = two_path_phase_difference(&l, &r, &qc, &sol(), 1.0, &units()).unwrap();
    let gauged = two_path_phase_difference_in(&l, &r, &qc, &shifted, 1.0, &units()).unwrap();
    assert!((gauged.total - plain.total).abs() <= 1e-8 * plain.total.abs());
    let single = path_phase(&r, &qc, &sol(), 1.0, &units()).unwrap();
    let single_gauged = path_phase_in(&r, &qc, &shifted, 1.0, &units()).unwrap();
    assert!((single - single_gauged).abs() > 1e-6);
}

#[test]
fn circulation_equals_flux_for_square_loop() {
    let square = path(&[(0.3, -0.3), (0.3, 0.3), (-0.3, 0.3), (-0.3, -0.3), (0.3, -0.3)], Side::Right);
    let circ = line_integral(&square, &sol(), &units()).unwrap();
    let flux = sol().flux(&units());
    assert!((circ - flux).abs() <= 1e-8 * flux);
}

#[test]
fn quantum_deflection_magnitude_and_direction() {
    let u = units();
    let qc = QuantumConfig::new(1.0, 1.0, 1.0).unwrap();
    let d = 0.2;
    let r = quantum_deflection(&qc, &sol(), 1.0, d, &u).unwrap();
    let expected = sol().flux(&u) / (qc.p * u.c * d);
    assert!((r.theta - expected).abs() <= 1e-8 * expected);
    assert_eq!(r.direction, Direction::TowardCenterLorentz);
    let neg = quantum_deflection(&qc, &sol(), -1.0, d, &u).unwrap();
    assert!(neg.theta < 0.0);
    assert_eq!(neg.direction, Direction::TowardCenterLorentz);
}

#[test]
fn planck_constant_cancels() {
    let u = units();
    let base = quantum_deflection(&QuantumConfig::new(1.0, 1.0, 1.0).unwrap(), &sol(), 1.0, 0.2, &u).unwrap().theta;
    for hbar in [0.5, 2.0] {
        let t = quantum_deflection(&QuantumConfig::new(hbar, 1.0, 1.0).unwrap(), &sol(), 1.0, 0.2, &u).unwrap().theta;
        assert!((t - base).abs() <= 1e-10 * base.abs());
    }
}

#[test]
fn wavelength_and_energy() {
    let qc = QuantumConfig::new(1.0, 2.0, 4.0).unwrap();
    assert!((qc.de_broglie_wavelength() - PI).abs() < 1e-15);
    assert!((qc.energy() - 0.5).abs() < 1e-15);
    assert!(QuantumConfig::new(0.0, 1.0, 1.0).is_err());
    assert!(QuantumConfig::new(1.0, -1.0, 1.0).is_err());
}
