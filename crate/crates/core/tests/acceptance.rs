//! Acceptance criteria, one PASS/FAIL line each.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use abdeflect::dynamics::{
    impulse_lag_quadrature, integrate_trajectory, one_sided_lag, relative_displacement_and_angle, Direction, LagMethod,
    TrajectoryConfig,
};
use abdeflect::forces::{
    dipole_line_from_boost, force_on_charge_extrapolated, force_on_solenoid_closed_form, force_on_solenoid_quadrature,
    BeamPath, QuadratureSpec,
};
use abdeflect::interference::{
    measure_deflection, measure_deflection_near, pattern_from_classical_lag, pattern_from_glass_plate,
    pattern_from_quantum_phase, CoveredSlit, GlassPlate, SlitGeometry,
};
use abdeflect::quantum_phase::{quantum_deflection, two_path_phase_difference, PathSpec, QuantumConfig, Side};
use abdeflect::scenario::linear_fit;
use abdeflect::{ChargeState, Result, Solenoid, UnitSystem, Vec3};

const C: f64 = 100.0;
const SAMPLES: usize = 4001;

type Waypoints = &'static [(f64, f64)];
type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { passed, detail: detail.into() })
}

fn units() -> UnitSystem {
    UnitSystem::new(C).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn quadrature_vs_closed_form() -> Result<Outcome> {
    let start = Instant::now();
    let u = units();
    let (x0, v) = (1.0, 1.0);
    let path = BeamPath::new(1.0, v, x0);
    let spec = QuadratureSpec::default();
    let mut ok = true;
    let mut worst = Vec::new();
    for ratio in [0.05, 0.02, 0.01] {
        let sol = Solenoid::new(ratio * x0, 1.0)?;
        let mut max_err = 0.0_f64;
        for tf in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let t = tf * x0 / v;
            let closed = force_on_solenoid_closed_form(&sol, &path, t, &u)?.force;
            let quad = force_on_solenoid_quadrature(&sol, &path.charge_at(t)?, t, &spec, &u)?.force;
            let scale = closed.norm();
            let err = ((quad.x - closed.x).abs() / scale).max((quad.y - closed.y).abs() / scale);
            max_err = max_err.max(err);
        }
        ok &= max_err <= ratio * ratio;
        if ratio == 0.01 {
            ok &= max_err <= 1e-3;
        }
        worst.push(format!("R/x0={ratio}: {max_err:.1e} (bound {:.0e})", ratio * ratio));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed <= 10.0;
    outcome(ok, format!("{}; {elapsed:.2}s", worst.join(", ")))
}

fn inside_force() -> Result<Outcome> {
    let start = Instant::now();
    let u = units();
    let (q, v, k) = (1.0, 1.0, 1.0);
    let expected = -2.0 * PI * q * v * k / (C * C);
    let charge = ChargeState::on_beam_line(q, 1.0, 0.0, v, 0.0)?;
    let mut worst = 0.0_f64;
    for r in [0.05, 0.1, 0.2, 0.5] {
        let f = force_on_solenoid_quadrature(&Solenoid::new(r, k)?, &charge, 0.0, &QuadratureSpec::default(), &u)?.force;
        worst = worst.max((f - Vec3::X * expected).norm() / expected.abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-6 && elapsed <= 5.0, format!("max rel err {worst:.1e} over R in [0.05, 0.5]; {elapsed:.2}s"))
}

fn dipole_equivalence() -> Result<Outcome> {
    let u = units();
    let sol = Solenoid::new(0.05, 1.0)?;
    let v = 1.0;
    let dl = dipole_line_from_boost(&sol, Vec3::Y * v, &u)?;
    let mut worst = 0.0_f64;
    for x0 in [-2.0, -1.0, 1.0, 1.5, 3.0] {
        for tf in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let t = tf * f64::abs(x0) / v;
            let path = BeamPath::new(1.0, v, x0);
            let on_q = force_on_charge_extrapolated(&dl, &path.charge_at(t)?, t, &u)?.force;
            let on_s = force_on_solenoid_closed_form(&sol, &path, t, &u)?.force;
            worst = worst.max((on_q + on_s).norm() / on_s.norm());
        }
    }
    outcome(worst <= 1e-4, format!("max residual {worst:.1e} on 5x5 grid"))
}

fn lag_closed_form() -> Result<Outcome> {
    let u = units();
    let sol = Solenoid::new(0.05, 1.0)?;
    let (v, m, q) = (1.0, 1.0, 1.0);
    let charge = ChargeState::on_beam_line(q, m, 1.0, v, 0.0)?;
    let cfg = TrajectoryConfig::new(1.0, v);
    let expected = 2.0 * PI * PI * q * sol.surface_current() * 0.0025 / (v * m * C * C);
    let report = integrate_trajectory(&cfg, &sol, &charge, &u)?;
    let ode = rel(report.perturbed.lag, expected);
    let impulse = rel(impulse_lag_quadrature(&cfg, &sol, &charge, &u)?, expected);
    let closed = rel(one_sided_lag(&cfg, &sol, &charge, &u), expected);
    outcome(
        report.kappa <= 1e-5 && ode <= 1e-3 && impulse <= 1e-8 && closed <= 1e-15,
        format!("kappa {:.2e}; trajectory {ode:.1e}; impulse quadrature {impulse:.1e}", report.kappa),
    )
}

fn angle_identity() -> Result<Outcome> {
    let u = units();
    let mut worst = 0.0_f64;
    for v in [0.5, 1.0, 2.0] {
        for k in [0.5, 1.0, 3.0] {
            for d in [0.15, 0.2, 0.4] {
                let sol = Solenoid::new(0.05, k)?;
                let charge = ChargeState::on_beam_line(1.0, 1.0, 1.0, v, 0.0)?;
                let cfg = TrajectoryConfig::new(1.0, v);
                let r = relative_displacement_and_angle(&cfg.mirrored(), &cfg, d, &sol, &charge, LagMethod::ImpulseQuadrature, &u)?;
                let identity = r.theta.abs() * charge.m * v * C * d / (charge.q * sol.flux(&u));
                worst = worst.max((identity - 1.0).abs());
            }
        }
    }
    outcome(worst <= 1e-6, format!("max |theta p c d / (q Phi) - 1| = {worst:.1e} over 27 points"))
}

fn quantum_phase() -> Result<Outcome> {
    let u = units();
    let sol = Solenoid::new(0.05, 1.0)?;
    let qc = QuantumConfig::new(1.0, 1.0, 1.0)?;
    let expected = sol.flux(&u) / (qc.hbar * C);
    let path = |pts: &[(f64, f64)], side| PathSpec::new(pts.iter().map(|&(x, y)| Vec3::new(x, y, 0.0)).collect(), side, &sol);
    let enclosing: [(Waypoints, Waypoints); 5] = [
        (&[(0.0, -3.0), (-0.1, -0.1), (-0.1, 0.1), (0.0, 3.0)], &[(0.0, -3.0), (0.1, -0.1), (0.1, 0.1), (0.0, 3.0)]),
        (&[(0.0, -3.0), (-0.06, 0.0), (0.0, 3.0)], &[(0.0, -3.0), (1.0, 0.0), (0.0, 3.0)]),
        (&[(0.0, -3.0), (-2.0, -1.0), (-0.3, 2.0), (0.0, 3.0)], &[(0.0, -3.0), (0.2, -0.2), (0.07, 0.3), (0.0, 3.0)]),
        (&[(1.0, -2.0), (-0.5, -0.5), (-0.5, 0.5), (1.0, 2.0)], &[(1.0, -2.0), (1.0, 2.0)]),
        (&[(0.0, -1.0), (-0.08, 0.0), (0.0, 1.0)], &[(0.0, -1.0), (0.3, -0.3), (0.3, 0.3), (0.0, 1.0)]),
    ];
    let mut worst = 0.0_f64;
    for (l, r) in enclosing {
        let d = two_path_phase_difference(&path(l, Side::Left)?, &path(r, Side::Right)?, &qc, &sol, 1.0, &u)?;
        worst = worst.max(rel(d.aharonov_bohm, expected));
    }
    let non_enclosing: [(Waypoints, Waypoints); 2] = [
        (&[(0.0, -3.0), (0.1, 0.0), (0.0, 3.0)], &[(0.0, -3.0), (0.8, 0.0), (0.0, 3.0)]),
        (&[(1.0, -1.0), (1.0, 1.0)], &[(1.0, -1.0), (2.0, -0.5), (1.5, 0.7), (1.0, 1.0)]),
    ];
    let mut stray = 0.0_f64;
    for (a, b) in non_enclosing {
        let d = two_path_phase_difference(&path(a, Side::Left)?, &path(b, Side::Right)?, &qc, &sol, 1.0, &u)?;
        stray = stray.max(d.aharonov_bohm.abs());
    }
    outcome(worst <= 1e-8 && stray <= 1e-10, format!("enclosing max rel err {worst:.1e}; non-enclosing max {stray:.1e}"))
}

fn sign_conflict() -> Result<Outcome> {
    let u = units();
    let sol = Solenoid::new(0.05, 1.0)?;
    let (q, m, v, d) = (1.0, 1.0, 1.0, 0.2);
    let charge = ChargeState::on_beam_line(q, m, 1.0, v, 0.0)?;
    let cfg = TrajectoryConfig::new(1.0, v);
    let qc = QuantumConfig::new(1.0, m * v, m)?;
    let classical = relative_displacement_and_angle(&cfg.mirrored(), &cfg, d, &sol, &charge, LagMethod::ImpulseQuadrature, &u)?;
    let quantum = quantum_deflection(&qc, &sol, q, d, &u)?;
    let geom = SlitGeometry::new(0.02, d, 1000.0, qc.de_broglie_wavelength())?;
    let tc = measure_deflection(&pattern_from_classical_lag(&geom, classical.delta_y_relative, SAMPLES))?.theta;
    let phase = quantum.theta * 2.0 * PI * d / geom.wavelength;
    let tq = measure_deflection(&pattern_from_quantum_phase(&geom, phase, SAMPLES))?.theta;
    let magnitude = rel(tc.abs(), tq.abs());
    let ok = tc.signum() == -tq.signum()
        && magnitude <= 1e-6
        && quantum.direction == Direction::TowardCenterLorentz
        && classical.direction == Direction::OppositeCenterLorentz;
    outcome(ok, format!("theta_classical {tc:.6e}, theta_quantum {tq:.6e}, magnitude mismatch {magnitude:.1e}"))
}

fn planck_independence() -> Result<Outcome> {
    let u = units();
    let sol = Solenoid::new(0.05, 1.0)?;
    let base = quantum_deflection(&QuantumConfig::new(1.0, 1.0, 1.0)?, &sol, 1.0, 0.2, &u)?.theta;
    let mut worst = 0.0_f64;
    for hbar in [0.5, 2.0] {
        let t = quantum_deflection(&QuantumConfig::new(hbar, 1.0, 1.0)?, &sol, 1.0, 0.2, &u)?.theta;
        worst = worst.max(rel(t, base));
    }
    outcome(worst <= 1e-10, format!("quantum angle spread {worst:.1e} over hbar in {{0.5, 1, 2}}"))
}

fn envelope_invariance() -> Result<Outcome> {
    let u = units();
    let (q, d) = (1.0, 0.2);
    let qc = QuantumConfig::new(1.0, 1.0, 1.0)?;
    let geom = SlitGeometry::new(0.02, d, 1000.0, qc.de_broglie_wavelength())?;
    let spacing = geom.fringe_spacing();
    let max_flux = 2.0 * 2.0 * PI * qc.hbar * C / q;
    let (mut fluxes, mut offsets) = (Vec::new(), Vec::new());
    let mut hint = 0.0;
    let mut drift = 0.0_f64;
    let steps = 37;
    for k in 0..steps {
        let flux = max_flux * k as f64 / (steps - 1) as f64;
        let sol = Solenoid::with_flux(0.05, flux, &u)?;
        let theta = quantum_deflection(&qc, &sol, q, d, &u)?.theta;
        let pattern = pattern_from_quantum_phase(&geom, theta * 2.0 * PI * d / geom.wavelength, SAMPLES);
        let m = measure_deflection_near(&pattern, hint)?;
        hint = m.comb_offset;
        drift = drift.max(m.envelope_shift.abs() / spacing);
        fluxes.push(flux);
        offsets.push(m.comb_offset);
    }
    let (_, _, r2) = linear_fit(&fluxes, &offsets);
    let span = offsets.last().unwrap() / spacing;
    outcome(
        drift <= 1e-8 && 1.0 - r2 <= 1e-9 && (span - 2.0).abs() < 1e-6,
        format!("shift 0..{span:.6} fringes; envelope drift {drift:.1e} spacings; 1 - R^2 = {:.1e}", 1.0 - r2),
    )
}

fn optical_analogy() -> Result<Outcome> {
    let plate = GlassPlate::new(1.037e-5, 1.5, CoveredSlit::Right)?;
    let base = SlitGeometry::new(0.02, 0.2, 1e6, 5e-5)?;
    let expected = plate.lag() / base.slit_separation;
    let ramp = 20;
    let mut thetas = Vec::new();
    for factor in [1.0, 0.5, 0.2, 0.1] {
        let geom = base.with_wavelength(5e-5 * factor)?;
        let mut hint = 0.0;
        let mut theta = 0.0;
        for k in 1..=ramp {
            let partial = GlassPlate::new(plate.thickness * k as f64 / ramp as f64, plate.index, plate.covered_slit)?;
            let m = measure_deflection_near(&pattern_from_glass_plate(&geom, &partial, SAMPLES), hint)?;
            hint = m.comb_offset;
            theta = m.theta;
        }
        thetas.push(theta);
    }
    let spread = thetas.iter().map(|t| rel(*t, thetas[0])).fold(0.0, f64::max);
    let vs_lag = thetas.iter().map(|t| rel(*t, expected)).fold(0.0, f64::max);
    outcome(
        spread <= 1e-8 && vs_lag <= 1e-6,
        format!("spread over lambda decade {spread:.1e}; vs lag/d {vs_lag:.1e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("quadrature vs closed-form force", quadrature_vs_closed_form),
        ("inside-center force", inside_force),
        ("third law / dipole-line equivalence", dipole_equivalence),
        ("longitudinal lag", lag_closed_form),
        ("classical angle identity", angle_identity),
        ("two-path quantum phase", quantum_phase),
        ("quantum vs classical sign conflict", sign_conflict),
        ("Planck-constant independence", planck_independence),
        ("envelope invariance under flux sweep", envelope_invariance),
        ("glass-plate optical analogy", optical_analogy),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (passed, detail) = match check() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!("criterion {:>2} {}: {name}: {detail}", i + 1, if passed { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
