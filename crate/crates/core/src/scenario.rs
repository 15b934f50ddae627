//! Named experiments, their parameters, and the reports they produce.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    closed_form_velocity_change, impulse_lag_quadrature, integrate_trajectory, one_sided_lag,
    relative_displacement_and_angle, Direction, LagMethod, PathMode, TrajectoryConfig,
};
use crate::em_fields::{ChargeState, Solenoid, UnitSystem};
use crate::error::{Error, Result};
use crate::forces::{
    dipole_line_from_boost, force_on_charge_extrapolated, force_on_solenoid_closed_form,
    force_on_solenoid_inside_center, force_on_solenoid_quadrature, BeamPath, QuadratureSpec,
};
use crate::interference::{
    measure_deflection, measure_deflection_near, pattern_from_classical_lag, pattern_from_glass_plate,
    pattern_from_quantum_phase, CoveredSlit, GlassPlate, SlitGeometry,
};
use crate::quantum_phase::{quantum_deflection, QuantumConfig};
use crate::table::{emit_csv, format_f64, Table};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    ForceProfile,
    InsideVsOutside,
    DipoleEquivalence,
    LagAndAngle,
    QuantumVsClassical,
    FringeSweep,
    GlassAnalogy,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 7] = [
        ScenarioName::ForceProfile,
        ScenarioName::InsideVsOutside,
        ScenarioName::DipoleEquivalence,
        ScenarioName::LagAndAngle,
        ScenarioName::QuantumVsClassical,
        ScenarioName::FringeSweep,
        ScenarioName::GlassAnalogy,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::ForceProfile => "force-profile",
            ScenarioName::InsideVsOutside => "inside-vs-outside",
            ScenarioName::DipoleEquivalence => "dipole-equivalence",
            ScenarioName::LagAndAngle => "lag-and-angle",
            ScenarioName::QuantumVsClassical => "quantum-vs-classical",
            ScenarioName::FringeSweep => "fringe-sweep",
            ScenarioName::GlassAnalogy => "glass-analogy",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|n| n.as_str() == s).ok_or_else(|| Error::InvalidParam {
            key: "scenario".into(),
            reason: format!("unknown scenario `{s}`"),
        })
    }
}

/// Parameter names, defaults and descriptions. Every scenario accepts every key.
pub const PARAMETERS: &[(&str, f64, &str)] = &[
    ("c", 100.0, "speed of light"),
    ("q", 1.0, "charge"),
    ("m", 1.0, "mass"),
    ("v", 1.0, "beam speed along +y"),
    ("R", 0.05, "solenoid radius"),
    ("K", 1.0, "solenoid surface current (positive: B along +z)"),
    ("x0", 1.0, "impact parameter magnitude"),
    ("a", 0.02, "slit width"),
    ("d", 0.2, "slit separation"),
    ("L", 1000.0, "screen distance"),
    ("hbar", 1.0, "reduced Planck constant"),
    ("t_max", 5.0, "force-profile half window in x0/v"),
    ("n_t", 41.0, "force-profile sample count"),
    ("t_span", 50.0, "trajectory half window in x0/v"),
    ("step_tol", 1e-10, "trajectory step tolerance"),
    ("n_samples", 4001.0, "screen samples per pattern"),
    ("n_steps", 23.0, "sweep steps"),
    ("max_fringes", 2.0, "fringe-sweep final shift in fringes"),
    ("n_glass", 1.5, "glass refractive index"),
    ("t_glass", 1.037e-5, "glass thickness"),
    ("lambda", 5e-5, "optical wavelength for glass-analogy"),
    ("L_glass", 1e6, "screen distance for glass-analogy"),
];

/// Resolved numeric parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Params(BTreeMap<String, f64>);

impl Default for Params {
    fn default() -> Self {
        Self(PARAMETERS.iter().map(|(k, v, _)| (k.to_string(), *v)).collect())
    }
}

impl Params {
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match self.0.get_mut(key) {
            Some(slot) if value.is_finite() => {
                *slot = value;
                Ok(())
            }
            Some(_) => Err(Error::InvalidParam { key: key.into(), reason: "value must be finite".into() }),
            None => Err(Error::InvalidParam { key: key.into(), reason: "unknown parameter".into() }),
        }
    }

    pub fn set_str(&mut self, key: &str, value: &str) -> Result<()> {
        let v: f64 = value.trim().parse().map_err(|_| Error::InvalidParam {
            key: key.into(),
            reason: format!("`{value}` is not a number"),
        })?;
        self.set(key, v)
    }

    pub fn get(&self, key: &str) -> f64 {
        self.0[key]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    fn count(&self, key: &str, min: usize) -> Result<usize> {
        let v = self.get(key);
        if v.fract() != 0.0 || v < min as f64 {
            return Err(Error::InvalidParam { key: key.into(), reason: format!("must be an integer >= {min}") });
        }
        Ok(v as usize)
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let v = self.get(key);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::InvalidParam { key: key.into(), reason: "must be positive".into() })
        }
    }
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::InvalidParam {
            key: format!("line {}", i + 1),
            reason: format!("expected key=value, got `{line}`"),
        })?;
        out.push((k.trim().to_owned(), v.trim().to_owned()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: ScenarioName,
    pub params: Params,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Opposite,
    Same,
    Indeterminate,
}

impl Verdict {
    pub fn from_angles(theta_classical: f64, theta_quantum: f64) -> Self {
        let s = theta_classical * theta_quantum;
        if !s.is_finite() || s == 0.0 {
            Verdict::Indeterminate
        } else if s < 0.0 {
            Verdict::Opposite
        } else {
            Verdict::Same
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Opposite => "OPPOSITE",
            Verdict::Same => "SAME",
            Verdict::Indeterminate => "INDETERMINATE",
        }
    }
}

/// One numerical cross-check: `value <= tolerance` passes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleCheck {
    fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Headline {
    pub theta_classical: f64,
    pub theta_quantum: f64,
    pub delta_y_relative: f64,
    pub flux: f64,
    pub verdict: Verdict,
    pub classical_direction: Option<Direction>,
    pub quantum_direction: Option<Direction>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioName,
    pub params: Params,
    pub headline: Headline,
    pub values: BTreeMap<String, f64>,
    pub oracles: Vec<OracleCheck>,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.oracles.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &OracleCheck> {
        self.oracles.iter().filter(|o| !o.passed)
    }

    /// Human-readable report.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.scenario);
        let _ = writeln!(s, "parameters:");
        for (k, v) in self.params.iter() {
            let _ = writeln!(s, "  {k} = {}", format_f64(v));
        }
        let h = &self.headline;
        let _ = writeln!(s, "headline:");
        let _ = writeln!(s, "  flux             = {}", format_f64(h.flux));
        let _ = writeln!(s, "  delta_y_relative = {}", format_f64(h.delta_y_relative));
        let _ = writeln!(s, "  theta_classical  = {}", format_f64(h.theta_classical));
        let _ = writeln!(s, "  theta_quantum    = {}", format_f64(h.theta_quantum));
        let _ = writeln!(s, "  verdict          = {}", h.verdict.as_str());
        if !self.values.is_empty() {
            let _ = writeln!(s, "values:");
            for (k, v) in &self.values {
                let _ = writeln!(s, "  {k} = {}", format_f64(*v));
            }
        }
        let _ = writeln!(s, "oracles:");
        for o in &self.oracles {
            let _ = writeln!(
                s,
                "  [{}] {}: {:.3e} (tolerance {:.1e})",
                if o.passed { "pass" } else { "FAIL" },
                o.name,
                o.value,
                o.tolerance
            );
        }
        let _ = writeln!(s, "status: {}", if self.passed() { "ok" } else { "oracle tolerance breached" });
        let _ = writeln!(s, "wall_time_s: {:.3}", self.wall_time_s);
        s
    }

    /// Table of failed oracles.
    pub fn discrepancy_table(&self) -> String {
        let mut s = String::from("oracle,value,tolerance\n");
        for o in self.failures() {
            let _ = writeln!(s, "{},{},{}", o.name, format_f64(o.value), format_f64(o.tolerance));
        }
        s
    }
}

/// Computed tables and report before anything is written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub table: Table,
    /// Additional tables written as `<scenario>.<suffix>.csv`.
    pub extra: Vec<(String, Table)>,
}

struct Setup {
    units: UnitSystem,
    sol: Solenoid,
    charge: ChargeState,
    cfg: TrajectoryConfig,
    qc: QuantumConfig,
    geom: SlitGeometry,
    x0: f64,
}

impl Setup {
    fn from_params(p: &Params) -> Result<Self> {
        let units = UnitSystem::new(p.positive("c")?)?;
        let sol = Solenoid::new(p.positive("R")?, p.get("K"))?;
        let (q, m, v) = (p.get("q"), p.positive("m")?, p.positive("v")?);
        let x0 = p.positive("x0")?;
        let charge = ChargeState::on_beam_line(q, m, x0, v, 0.0)?;
        charge.beta(&units);
        let mut cfg = TrajectoryConfig::new(x0, v).with_half_span(p.positive("t_span")?);
        cfg.step_tolerance = p.positive("step_tol")?;
        let qc = QuantumConfig::new(p.positive("hbar")?, m * v, m)?;
        let geom = SlitGeometry::new(p.positive("a")?, p.positive("d")?, p.positive("L")?, qc.de_broglie_wavelength())?;
        Ok(Self { units, sol, charge, cfg, qc, geom, x0 })
    }

    fn headline(&self) -> Headline {
        let d = self.geom.slit_separation;
        let classical = relative_displacement_and_angle(
            &self.cfg.mirrored(),
            &self.cfg,
            d,
            &self.sol,
            &self.charge,
            LagMethod::ImpulseQuadrature,
            &self.units,
        );
        let quantum = quantum_deflection(&self.qc, &self.sol, self.charge.q, d, &self.units);
        let (theta_c, dy, dir_c) = match &classical {
            Ok(r) => (r.theta, r.delta_y_relative, Some(r.direction)),
            Err(e) => {
                log::warn!("classical deflection unavailable: {e}");
                (f64::NAN, f64::NAN, None)
            }
        };
        let (theta_q, dir_q) = match &quantum {
            Ok(r) => (r.theta, Some(r.direction)),
            Err(e) => {
                log::warn!("quantum deflection unavailable: {e}");
                (f64::NAN, None)
            }
        };
        Headline {
            theta_classical: theta_c,
            theta_quantum: theta_q,
            delta_y_relative: dy,
            flux: self.sol.flux(&self.units),
            verdict: Verdict::from_angles(theta_c, theta_q),
            classical_direction: dir_c,
            quantum_direction: dir_q,
        }
    }
}

/// Relative difference with a zero-safe denominator.
fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Vector difference relative to the norm of `reference`; zero when both vanish.
fn rel_vec(value: Vec3, reference: Vec3) -> f64 {
    let diff = (value - reference).norm();
    let scale = reference.norm();
    if scale == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / scale
    }
}

/// Coefficient of determination of a least-squares line through `(x, y)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    (slope, intercept, r2)
}

/// Executes the scenario pipeline without writing anything.
pub fn execute(name: ScenarioName, params: &Params) -> Result<Outcome> {
    let start = Instant::now();
    let setup = Setup::from_params(params)?;
    let mut values = BTreeMap::new();
    let mut oracles = Vec::new();
    let mut extra = Vec::new();
    let table = match name {
        ScenarioName::ForceProfile => force_profile(&setup, params, &mut values, &mut oracles)?,
        ScenarioName::InsideVsOutside => inside_vs_outside(&setup, &mut values, &mut oracles)?,
        ScenarioName::DipoleEquivalence => dipole_equivalence(&setup, &mut values, &mut oracles)?,
        ScenarioName::LagAndAngle => lag_and_angle(&setup, &mut values, &mut oracles)?,
        ScenarioName::QuantumVsClassical => quantum_vs_classical(&setup, params, &mut values, &mut oracles)?,
        ScenarioName::FringeSweep => fringe_sweep(&setup, params, &mut values, &mut oracles, &mut extra)?,
        ScenarioName::GlassAnalogy => glass_analogy(&setup, params, &mut values, &mut oracles, &mut extra)?,
    };
    let report = RunReport {
        scenario: name,
        params: params.clone(),
        headline: setup.headline(),
        values,
        oracles,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(Outcome { report, table, extra })
}

/// Executes a scenario and writes `<name>.csv`, `<name>.report.txt` and
/// `<name>.summary.json` (plus any extra tables) into its output directory.
pub fn run_scenario(s: &Scenario) -> Result<RunReport> {
    let outcome = execute(s.name, &s.params)?;
    std::fs::create_dir_all(&s.output_dir).map_err(|source| Error::Io { path: s.output_dir.clone(), source })?;
    let stem = s.name.as_str();
    emit_csv(&outcome.table, &s.output_dir.join(format!("{stem}.csv")))?;
    for (suffix, t) in &outcome.extra {
        emit_csv(t, &s.output_dir.join(format!("{stem}.{suffix}.csv")))?;
    }
    write_text(&s.output_dir.join(format!("{stem}.report.txt")), &outcome.report.render())?;
    let json = serde_json::to_string_pretty(&summary_json(&outcome.report)).expect("report serializes");
    write_text(&s.output_dir.join(format!("{stem}.summary.json")), &(json + "\n"))?;
    Ok(outcome.report)
}

fn summary_json(report: &RunReport) -> serde_json::Value {
    let mut v = serde_json::to_value(report).expect("report serializes");
    v["passed"] = serde_json::Value::Bool(report.passed());
    v
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn force_profile(s: &Setup, p: &Params, values: &mut BTreeMap<String, f64>, oracles: &mut Vec<OracleCheck>) -> Result<Table> {
    let n = p.count("n_t", 2)?;
    let t_max = p.positive("t_max")? * s.x0 / s.cfg.v;
    let path = BeamPath::new(s.charge.q, s.cfg.v, s.x0);
    let spec = QuadratureSpec::default();
    let times: Vec<f64> = (0..n).map(|k| -t_max + 2.0 * t_max * k as f64 / (n - 1) as f64).collect();
    let rows = times
        .par_iter()
        .map(|&t| {
            let closed = force_on_solenoid_closed_form(&s.sol, &path, t, &s.units)?;
            let quad = force_on_solenoid_quadrature(&s.sol, &path.charge_at(t)?, t, &spec, &s.units)?;
            Ok((t, closed.force, quad.force))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(["t", "fx_closed", "fy_closed", "fx_quadrature", "fy_quadrature", "rel_err"]);
    let mut worst = 0.0_f64;
    for (t, c, q) in rows {
        let e = rel_vec(q, c);
        worst = worst.max(e);
        table.push_nums(&[t, c.x, c.y, q.x, q.y, e]);
    }
    values.insert("max_rel_err".into(), worst);
    oracles.push(OracleCheck::new("quadrature vs closed form (relative)", worst, 1e-3));
    Ok(table)
}

fn inside_vs_outside(s: &Setup, values: &mut BTreeMap<String, f64>, oracles: &mut Vec<OracleCheck>) -> Result<Table> {
    let spec = QuadratureSpec::default();
    let (q, v) = (s.charge.q, s.cfg.v);
    let mut table = Table::new(["case", "R", "fx_quadrature", "fy_quadrature", "fx_closed", "fy_closed", "rel_err"]);
    let mut worst_inside = 0.0_f64;
    for factor in [1.0, 2.0, 5.0, 10.0] {
        let sol = Solenoid::new(s.sol.radius() * factor, s.sol.surface_current())?;
        let center = ChargeState::on_beam_line(q, s.charge.m, 0.0, v, 0.0)?;
        let quad = force_on_solenoid_quadrature(&sol, &center, 0.0, &spec, &s.units)?.force;
        let closed = force_on_solenoid_inside_center(&sol, q, v, &s.units);
        let e = rel_vec(quad, closed);
        worst_inside = worst_inside.max(e);
        table.push(vec![
            "inside-center".into(),
            sol.radius().into(),
            quad.x.into(),
            quad.y.into(),
            closed.x.into(),
            closed.y.into(),
            e.into(),
        ]);
    }
    let path = BeamPath::new(q, v, s.x0);
    let closed_out = force_on_solenoid_closed_form(&s.sol, &path, 0.0, &s.units)?.force;
    let quad_out = force_on_solenoid_quadrature(&s.sol, &path.charge_at(0.0)?, 0.0, &spec, &s.units)?.force;
    let e_out = rel_vec(quad_out, closed_out);
    table.push(vec![
        "outside-closest".into(),
        s.sol.radius().into(),
        quad_out.x.into(),
        quad_out.y.into(),
        closed_out.x.into(),
        closed_out.y.into(),
        e_out.into(),
    ]);
    let inside = force_on_solenoid_inside_center(&s.sol, q, v, &s.units);
    values.insert("fx_inside".into(), inside.x);
    values.insert("fx_outside_closest".into(), closed_out.x);
    oracles.push(OracleCheck::new("inside-center quadrature vs closed form (relative)", worst_inside, 1e-6));
    oracles.push(OracleCheck::new("outside quadrature vs closed form (relative)", e_out, 1e-3));
    // The transverse force for a centre passage points opposite to the one at closest outside approach.
    let same_sign = if inside.x * closed_out.x < 0.0 || (inside.x == 0.0 && closed_out.x == 0.0) { 0.0 } else { 1.0 };
    oracles.push(OracleCheck::new("inside/outside transverse forces opposite", same_sign, 0.0));
    Ok(table)
}

fn dipole_equivalence(s: &Setup, values: &mut BTreeMap<String, f64>, oracles: &mut Vec<OracleCheck>) -> Result<Table> {
    let v = s.cfg.v;
    let dl = dipole_line_from_boost(&s.sol, Vec3::Y * v, &s.units)?;
    let mut table = Table::new(["x0", "t", "fx_dipole", "fy_dipole", "fx_closed", "fy_closed", "residual"]);
    let mut worst = 0.0_f64;
    for xf in [-2.0, -1.0, 1.0, 1.5, 3.0] {
        let x0 = xf * s.x0;
        for tf in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let t = tf * x0.abs() / v;
            let path = BeamPath::new(s.charge.q, v, x0);
            let on_charge = force_on_charge_extrapolated(&dl, &path.charge_at(t)?, t, &s.units)?.force;
            let on_solenoid = force_on_solenoid_closed_form(&s.sol, &path, t, &s.units)?.force;
            let residual = rel_vec(-on_charge, on_solenoid);
            worst = worst.max(residual);
            table.push_nums(&[x0, t, on_charge.x, on_charge.y, on_solenoid.x, on_solenoid.y, residual]);
        }
    }
    values.insert("max_third_law_residual".into(), worst);
    oracles.push(OracleCheck::new("dipole line force + closed form force (relative)", worst, 1e-4));
    Ok(table)
}

fn lag_and_angle(s: &Setup, values: &mut BTreeMap<String, f64>, oracles: &mut Vec<OracleCheck>) -> Result<Table> {
    let closed = one_sided_lag(&s.cfg, &s.sol, &s.charge, &s.units);
    let impulse = impulse_lag_quadrature(&s.cfg, &s.sol, &s.charge, &s.units)?;
    let traj = integrate_trajectory(&s.cfg, &s.sol, &s.charge, &s.units)?;
    let d = s.geom.slit_separation;
    let defl = relative_displacement_and_angle(
        &s.cfg.mirrored(),
        &s.cfg,
        d,
        &s.sol,
        &s.charge,
        LagMethod::Trajectory(PathMode::Perturbed),
        &s.units,
    )?;
    let flux = s.sol.flux(&s.units);
    let p = s.charge.m * s.cfg.v;
    let theta_formula = s.charge.q * flux / (p * s.units.c * d);
    values.insert("kappa".into(), traj.kappa);
    values.insert("lag_closed_form".into(), closed);
    values.insert("lag_impulse_quadrature".into(), impulse);
    values.insert("lag_trajectory_unperturbed".into(), traj.unperturbed.lag);
    values.insert("lag_trajectory_perturbed".into(), traj.perturbed.lag);
    values.insert("delta_y_relative".into(), defl.delta_y_relative);
    values.insert("theta".into(), defl.theta);
    oracles.push(OracleCheck::new("impulse quadrature lag vs closed form", rel(impulse, closed), 1e-8));
    oracles.push(OracleCheck::new("trajectory lag vs closed form", rel(traj.perturbed.lag, closed), 1e-3));
    oracles.push(OracleCheck::new("relative lag is twice one-sided", rel(defl.delta_y_relative.abs(), 2.0 * closed.abs()), 1e-3));
    oracles.push(OracleCheck::new("|theta| p c d / (q Phi) - 1", rel(defl.theta.abs(), theta_formula.abs()), 1e-3));
    let net_ratio = |passage: &crate::dynamics::Passage| {
        let peak = passage.max_transverse_velocity();
        if peak > 0.0 {
            passage.final_delta_v.x.abs() / peak
        } else {
            0.0
        }
    };
    values.insert("net_transverse_ratio_perturbed".into(), net_ratio(&traj.perturbed));
    oracles.push(OracleCheck::new("net transverse velocity change / peak", net_ratio(&traj.unperturbed), 1e-6));

    let mut table = Table::new(["t", "dvx_trajectory", "dvy_trajectory", "dvx_closed", "dvy_closed"]);
    for sample in &traj.perturbed.history {
        let c = closed_form_velocity_change(&s.cfg, &s.sol, &s.charge, sample.t, &s.units);
        table.push_nums(&[sample.t, sample.delta_v.x, sample.delta_v.y, c.x, c.y]);
    }
    Ok(table)
}

fn direction_name(d: Option<Direction>) -> &'static str {
    match d {
        Some(Direction::TowardCenterLorentz) => "toward-center-lorentz",
        Some(Direction::OppositeCenterLorentz) => "opposite-center-lorentz",
        Some(Direction::Undeflected) => "undeflected",
        None => "unavailable",
    }
}

fn quantum_vs_classical(s: &Setup, p: &Params, values: &mut BTreeMap<String, f64>, oracles: &mut Vec<OracleCheck>) -> Result<Table> {
    let n = p.count("n_samples", 3)?;
    let d = s.geom.slit_separation;
    let classical = relative_displacement_and_angle(
        &s.cfg.mirrored(),
        &s.cfg,
        d,
        &s.sol,
        &s.charge,
        LagMethod::ImpulseQuadrature,
        &s.units,
    )?;
    let quantum = quantum_deflection(&s.qc, &s.sol, s.charge.q, d, &s.units)?;
    let quantum_phase = quantum.theta * 2.0 * PI * d / s.geom.wavelength;
    let c_pattern = pattern_from_classical_lag(&s.geom, classical.delta_y_relative, n);
    let q_pattern = pattern_from_quantum_phase(&s.geom, quantum_phase, n);
    let c_meas = measure_deflection(&c_pattern)?;
    let q_meas = measure_deflection(&q_pattern)?;

    values.insert("theta_classical_measured".into(), c_meas.theta);
    values.insert("theta_quantum_measured".into(), q_meas.theta);
    values.insert("quantum_phase_difference".into(), quantum_phase);
    oracles.push(OracleCheck::new("|theta_classical| vs |theta_quantum|", rel(classical.theta.abs(), quantum.theta.abs()), 1e-6));
    let opposite = if classical.theta * quantum.theta < 0.0 { 0.0 } else { 1.0 };
    oracles.push(OracleCheck::new("classical and quantum signs opposite", opposite, 0.0));
    oracles.push(OracleCheck::new("measured vs predicted classical angle", rel(c_meas.theta, classical.theta), 1e-6));
    oracles.push(OracleCheck::new("measured vs predicted quantum angle", rel(q_meas.theta, quantum.theta), 1e-6));

    let mut table = Table::new(["model", "theta_predicted", "theta_measured", "envelope_shift", "direction"]);
    table.push(vec![
        "classical-force".into(),
        classical.theta.into(),
        c_meas.theta.into(),
        c_meas.envelope_shift.into(),
        direction_name(Some(classical.direction)).into(),
    ]);
    table.push(vec![
        "quantum-phase".into(),
        quantum.theta.into(),
        q_meas.theta.into(),
        q_meas.envelope_shift.into(),
        direction_name(Some(quantum.direction)).into(),
    ]);
    Ok(table)
}

fn fringe_sweep(
    s: &Setup,
    p: &Params,
    values: &mut BTreeMap<String, f64>,
    oracles: &mut Vec<OracleCheck>,
    extra: &mut Vec<(String, Table)>,
) -> Result<Table> {
    let n_steps = p.count("n_steps", 3)?;
    let n = p.count("n_samples", 3)?;
    let max_fringes = p.positive("max_fringes")?;
    let q = s.charge.q;
    if q == 0.0 {
        return Err(Error::InvalidParam { key: "q".into(), reason: "fringe sweep needs a charged particle".into() });
    }
    let max_flux = max_fringes * 2.0 * PI * s.qc.hbar * s.units.c / q;
    let d = s.geom.slit_separation;
    let spacing = s.geom.fringe_spacing();
    let steps = (0..n_steps)
        .into_par_iter()
        .map(|k| {
            let flux = max_flux * k as f64 / (n_steps - 1) as f64;
            let sol = Solenoid::with_flux(s.sol.radius(), flux, &s.units)?;
            let qd = quantum_deflection(&s.qc, &sol, q, d, &s.units)?;
            let phase = qd.theta * 2.0 * PI * d / s.geom.wavelength;
            Ok((flux, phase, pattern_from_quantum_phase(&s.geom, phase, n)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(["flux", "delta_phi", "comb_offset", "envelope_shift", "theta"]);
    let mut hint = 0.0;
    let (mut fluxes, mut offsets) = (Vec::new(), Vec::new());
    let mut drift = 0.0_f64;
    for (flux, phase, pattern) in &steps {
        let m = measure_deflection_near(pattern, hint)?;
        hint = m.comb_offset;
        drift = drift.max(m.envelope_shift.abs() / spacing);
        fluxes.push(*flux);
        offsets.push(m.comb_offset);
        table.push_nums(&[*flux, *phase, m.comb_offset, m.envelope_shift, m.theta]);
    }
    let (slope, _, r2) = linear_fit(&fluxes, &offsets);
    let expected_slope = q * s.geom.screen_distance / (s.qc.p * s.units.c * d);
    values.insert("comb_offset_per_flux".into(), slope);
    values.insert("r_squared".into(), r2);
    values.insert("max_envelope_drift_fringes".into(), drift);
    oracles.push(OracleCheck::new("envelope drift (fringe spacings)", drift, 1e-8));
    oracles.push(OracleCheck::new("1 - R^2 of comb offset vs flux", 1.0 - r2, 1e-9));
    oracles.push(OracleCheck::new("comb offset slope vs q L / (p c d)", rel(slope, expected_slope), 1e-6));
    if let Some((_, _, last)) = steps.last() {
        extra.push(("pattern".into(), last.to_table()));
    }
    Ok(table)
}

fn glass_analogy(
    s: &Setup,
    p: &Params,
    values: &mut BTreeMap<String, f64>,
    oracles: &mut Vec<OracleCheck>,
    extra: &mut Vec<(String, Table)>,
) -> Result<Table> {
    let n = p.count("n_samples", 3)?;
    let ramp = p.count("n_steps", 2)?;
    let plate = GlassPlate::new(p.get("t_glass"), p.get("n_glass"), CoveredSlit::Right)?;
    let lambda0 = p.positive("lambda")?;
    let d = s.geom.slit_separation;
    let expected = plate.deflection(d);
    let mut table = Table::new(["lambda", "delta_phi", "comb_offset", "theta_measured", "theta_expected"]);
    let mut thetas = Vec::new();
    let mut last_pattern = None;
    let optical = SlitGeometry::new(s.geom.slit_width, d, p.positive("L_glass")?, lambda0)?;
    for factor in [1.0, 0.5, 0.2, 0.1] {
        let geom = optical.with_wavelength(lambda0 * factor)?;
        // Insert the plate gradually so one bright fringe can be followed.
        let mut hint = 0.0;
        let mut measured = None;
        for k in 1..=ramp {
            let partial = GlassPlate::new(plate.thickness * k as f64 / ramp as f64, plate.index, plate.covered_slit)?;
            let pattern = pattern_from_glass_plate(&geom, &partial, n);
            let m = measure_deflection_near(&pattern, hint)?;
            hint = m.comb_offset;
            measured = Some((m, pattern));
        }
        let (m, pattern) = measured.expect("ramp has at least one step");
        table.push_nums(&[geom.wavelength, pattern.phase_offset, m.comb_offset, m.theta, expected]);
        thetas.push(m.theta);
        last_pattern = Some(pattern);
    }
    let spread = thetas.iter().map(|t| rel(*t, thetas[0])).fold(0.0, f64::max);
    let vs_lag = thetas.iter().map(|t| rel(*t, expected)).fold(0.0, f64::max);
    values.insert("theta_expected".into(), expected);
    values.insert("theta_spread_over_decade".into(), spread);
    oracles.push(OracleCheck::new("glass deflection spread over a wavelength decade", spread, 1e-8));
    oracles.push(OracleCheck::new("glass deflection vs lag / d", vs_lag, 1e-6));
    if let Some(pattern) = last_pattern {
        extra.push(("pattern".into(), pattern.to_table()));
    }
    Ok(table)
}
