//! Motion of the passing charge under the order `1/c^2` force from the
//! solenoid, and the longitudinal lag and deflection angle it produces.
//!
//! The force on the charge is the negative of the closed-form force on the
//! solenoid (equivalently the field of the primed-frame dipole line). Signs
//! follow the crate convention: `+x` is "right" looking along the `+y` beam
//! with `+z` up, and signed angles are positive toward `+x`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::em_fields::{solenoid_interior_b, ChargeState, Solenoid, UnitSystem};
use crate::error::{Error, Result};
use crate::forces::{closed_form_kernel, dipole_density_from_boost, point_dipole_line_field};
use crate::ode::{self, StepControl, StepStats};
use crate::quadrature::{self, Tolerance};
use crate::vec3::Vec3;

/// Coupling above which a passage is flagged as outside the weak regime.
pub const WEAK_COUPLING: f64 = 1e-3;
/// Coupling above which the impulse comparison is refused.
pub const MAX_COUPLING: f64 = 1e-1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForceSource {
    /// Negative of the closed-form force on the solenoid.
    ClosedForm,
    /// Electrostatic field of the point-dipole line, using the instantaneous velocity.
    DipoleLine,
}

/// Where the force is evaluated during integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathMode {
    /// On the straight unperturbed path (impulse approximation).
    Unperturbed,
    /// On the integrated path.
    Perturbed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    /// Signed impact parameter; positive passes on the right.
    pub x0: f64,
    /// Initial speed along `+y`.
    pub v: f64,
    /// Integration window in units of `|x0| / v`.
    pub t_span: (f64, f64),
    pub step_tolerance: f64,
    pub force_source: ForceSource,
    pub max_steps: usize,
}

impl TrajectoryConfig {
    pub fn new(x0: f64, v: f64) -> Self {
        Self {
            x0,
            v,
            t_span: (-50.0, 50.0),
            step_tolerance: 1e-10,
            force_source: ForceSource::ClosedForm,
            max_steps: 1_000_000,
        }
    }

    /// Same passage on the other side of the solenoid.
    pub fn mirrored(&self) -> Self {
        Self { x0: -self.x0, ..*self }
    }

    pub fn with_force_source(mut self, source: ForceSource) -> Self {
        self.force_source = source;
        self
    }

    pub fn with_half_span(mut self, half_span: f64) -> Self {
        self.t_span = (-half_span, half_span);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.v > 0.0 && self.v.is_finite()) {
            return Err(Error::Domain(format!("speed must be positive, got {}", self.v)));
        }
        if !(self.x0 != 0.0 && self.x0.is_finite()) {
            return Err(Error::Domain("impact parameter must be nonzero".into()));
        }
        let (lo, hi) = self.t_span;
        if !(lo < 0.0 && hi > 0.0) {
            return Err(Error::Domain(format!("time window ({lo}, {hi}) must bracket closest approach")));
        }
        if self.step_tolerance.is_nan() || self.step_tolerance <= 0.0 {
            return Err(Error::Domain("step tolerance must be positive".into()));
        }
        if lo > -50.0 || hi < 50.0 {
            log::warn!("time window ({lo}, {hi}) x0/v is shorter than the recommended +-50");
        }
        Ok(())
    }

    fn time_unit(&self) -> f64 {
        self.x0.abs() / self.v
    }
}

/// Velocity perturbation at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocitySample {
    pub t: f64,
    pub delta_v: Vec3,
}

/// One integrated passage of the charge past the solenoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub mode: PathMode,
    pub x0: f64,
    /// Net longitudinal displacement relative to free motion.
    pub lag: f64,
    /// Analytic contribution of `|t| > T` included in `lag`.
    pub tail_correction: f64,
    /// Net velocity change after the passage (tails included).
    pub final_delta_v: Vec3,
    pub history: Vec<VelocitySample>,
    pub steps: usize,
}

impl Passage {
    pub fn max_transverse_velocity(&self) -> f64 {
        self.history.iter().map(|s| s.delta_v.x.abs()).fold(0.0, f64::max)
    }
}

/// Both integration modes for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub kappa: f64,
    pub unperturbed: Passage,
    pub perturbed: Passage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    TowardCenterLorentz,
    OppositeCenterLorentz,
    Undeflected,
}

impl Direction {
    /// Labels a signed angle (positive toward `+x`) against a reference direction.
    pub fn classify(theta: f64, reference: Option<Vec3>) -> Self {
        let s = reference.map_or(0.0, |r| theta * r.x);
        if s > 0.0 {
            Direction::TowardCenterLorentz
        } else if s < 0.0 {
            Direction::OppositeCenterLorentz
        } else {
            Direction::Undeflected
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeflectionModel {
    ClassicalForce,
    QuantumPhase,
}

/// Two-slit deflection prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflectionResult {
    pub model: DeflectionModel,
    /// Velocity perturbation history of the right-hand passage, when integrated.
    pub delta_v: Vec<VelocitySample>,
    /// Lag of the right-hand passage (`x0 > 0`).
    pub delta_y_one_side: Option<f64>,
    /// `lag(x0) - lag(-x0)`: how far the right-hand wave leads the left-hand one.
    /// For the quantum model this is the equivalent path-length difference.
    pub delta_y_relative: f64,
    /// Signed deflection angle, positive toward `+x`.
    pub theta: f64,
    pub direction: Direction,
    pub tail_correction: f64,
    pub slit_separation: f64,
}

/// How [`relative_displacement_and_angle`] obtains the one-sided lags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LagMethod {
    ClosedForm,
    ImpulseQuadrature,
    Trajectory(PathMode),
}

/// Peak fractional velocity change `2 pi q K R^2 / (m v c^2 |x0|)`.
pub fn coupling(cfg: &TrajectoryConfig, sol: &Solenoid, charge: &ChargeState, units: &UnitSystem) -> f64 {
    let r = sol.radius();
    (2.0 * PI * charge.q * sol.surface_current() * r * r / (charge.m * cfg.v * units.c * units.c * cfg.x0)).abs()
}

/// Force on the charge at `position` moving with `velocity`.
pub fn force_on_charge(
    sol: &Solenoid,
    q: f64,
    position: Vec3,
    velocity: Vec3,
    source: ForceSource,
    units: &UnitSystem,
) -> Result<Vec3> {
    match source {
        ForceSource::ClosedForm => Ok(-closed_form_kernel(sol, q, velocity.y, position.x, position.y, units)),
        ForceSource::DipoleLine => {
            let p = dipole_density_from_boost(sol, velocity, units);
            Ok(point_dipole_line_field(p, position)? * q)
        }
    }
}

/// Impulse-approximation velocity change accumulated since `t = -inf`,
/// `-(2 pi q v K R^2 / (m c^2)) [x vt - y x0] / (v (x0^2 + (vt)^2))`.
pub fn closed_form_velocity_change(
    cfg: &TrajectoryConfig,
    sol: &Solenoid,
    charge: &ChargeState,
    t: f64,
    units: &UnitSystem,
) -> Vec3 {
    let r = sol.radius();
    let v = cfg.v;
    let prefactor = 2.0 * PI * charge.q * v * sol.surface_current() * r * r / (charge.m * units.c * units.c);
    let vt = v * t;
    let d = v * (cfg.x0 * cfg.x0 + vt * vt);
    Vec3::new(-prefactor * vt / d, prefactor * cfg.x0 / d, 0.0)
}

/// Time integral of the longitudinal velocity change over `(t_from, t_to)`.
fn longitudinal_lag_between(
    cfg: &TrajectoryConfig,
    sol: &Solenoid,
    charge: &ChargeState,
    t_from: f64,
    t_to: f64,
    units: &UnitSystem,
) -> f64 {
    // Antiderivative of the y-component: (A / v) atan(v t / x0).
    let r = sol.radius();
    let a = 2.0 * PI * charge.q * sol.surface_current() * r * r / (charge.m * units.c * units.c);
    let anti = |t: f64| {
        if t.is_infinite() {
            t.signum() * cfg.x0.signum() * PI / 2.0
        } else {
            (cfg.v * t / cfg.x0).atan()
        }
    };
    a / cfg.v * (anti(t_to) - anti(t_from))
}

/// Net longitudinal lag of one passage, `sign(x0) 2 pi^2 q K R^2 / (v m c^2)`.
pub fn one_sided_lag(cfg: &TrajectoryConfig, sol: &Solenoid, charge: &ChargeState, units: &UnitSystem) -> f64 {
    let r = sol.radius();
    cfg.x0.signum() * 2.0 * PI * PI * charge.q * sol.surface_current() * r * r / (cfg.v * charge.m * units.c * units.c)
}

/// Lag from adaptive quadrature of the closed-form velocity change over all time.
pub fn impulse_lag_quadrature(
    cfg: &TrajectoryConfig,
    sol: &Solenoid,
    charge: &ChargeState,
    units: &UnitSystem,
) -> Result<f64> {
    cfg.validate()?;
    let est = quadrature::integrate_real_line(
        |t: f64| closed_form_velocity_change(cfg, sol, charge, t, units).y,
        cfg.time_unit(),
        Tolerance::new(0.0, 1e-13),
        200,
    )?;
    Ok(est.value)
}

fn check_coupling(kappa: f64) -> Result<()> {
    if kappa > MAX_COUPLING {
        return Err(Error::Coupling { kappa, limit: MAX_COUPLING });
    }
    if kappa > WEAK_COUPLING {
        log::warn!("coupling kappa = {kappa:e} exceeds the weak-coupling limit {WEAK_COUPLING:e}");
    }
    Ok(())
}

fn integrate_passage(
    cfg: &TrajectoryConfig,
    sol: &Solenoid,
    charge: &ChargeState,
    mode: PathMode,
    kappa: f64,
    units: &UnitSystem,
) -> Result<Passage> {
    let tau = cfg.time_unit();
    let t0 = cfg.t_span.0 * tau;
    let t1 = cfg.t_span.1 * tau;
    let head = longitudinal_lag_between(cfg, sol, charge, f64::NEG_INFINITY, t0, units);
    let tail = longitudinal_lag_between(cfg, sol, charge, t1, f64::INFINITY, units);
    let dv0 = closed_form_velocity_change(cfg, sol, charge, t0, units);

    if kappa == 0.0 {
        return Ok(Passage {
            mode,
            x0: cfg.x0,
            lag: 0.0,
            tail_correction: 0.0,
            final_delta_v: Vec3::ZERO,
            history: vec![VelocitySample { t: t0, delta_v: Vec3::ZERO }, VelocitySample { t: t1, delta_v: Vec3::ZERO }],
            steps: 0,
        });
    }

    let pos_scale = kappa * cfg.x0.abs();
    let vel_scale = kappa * cfg.v;
    let rtol = cfg.step_tolerance;
    let control = StepControl {
        rtol,
        atol: [rtol * pos_scale, rtol * pos_scale, rtol * vel_scale, rtol * vel_scale],
        initial_step: 1e-2 * tau,
        max_steps: cfg.max_steps,
    };
    let inv_m = 1.0 / charge.m;
    let rhs = |t: f64, s: &[f64; 4]| -> Result<[f64; 4]> {
        let (position, velocity) = match mode {
            PathMode::Unperturbed => (Vec3::new(cfg.x0, cfg.v * t, 0.0), Vec3::Y * cfg.v),
            PathMode::Perturbed => (
                Vec3::new(cfg.x0 + s[0], cfg.v * t + s[1], 0.0),
                Vec3::new(s[2], cfg.v + s[3], 0.0),
            ),
        };
        let f = force_on_charge(sol, charge.q, position, velocity, cfg.force_source, units)?;
        Ok([s[2], s[3], f.x * inv_m, f.y * inv_m])
    };
    let mut history = Vec::new();
    let (end, stats): ([f64; 4], StepStats) = ode::integrate(
        rhs,
        t0,
        [0.0, head, dv0.x, dv0.y],
        t1,
        &control,
        |t, s| history.push(VelocitySample { t, delta_v: Vec3::new(s[2], s[3], 0.0) }),
    )?;
    let dv_end_closed = closed_form_velocity_change(cfg, sol, charge, t1, units);
    Ok(Passage {
        mode,
        x0: cfg.x0,
        lag: end[1] + tail,
        tail_correction: head + tail,
        final_delta_v: Vec3::new(end[2], end[3], 0.0) - dv_end_closed,
        history,
        steps: stats.accepted,
    })
}

/// Integrates `m r'' = F_on_charge` for one passage in both path modes.
///
/// Only `q` and `m` are taken from `charge`; the kinematics come from `cfg`.
/// The window `|t| > T` is covered analytically: the run starts from the
/// closed-form velocity change at `-T` and the lag beyond `+T` is added from
/// the closed form.
pub fn integrate_trajectory(
    cfg: &TrajectoryConfig,
    sol: &Solenoid,
    charge: &ChargeState,
    units: &UnitSystem,
) -> Result<TrajectoryReport> {
    cfg.validate()?;
    let kappa = coupling(cfg, sol, charge, units);
    check_coupling(kappa)?;
    Ok(TrajectoryReport {
        kappa,
        unperturbed: integrate_passage(cfg, sol, charge, PathMode::Unperturbed, kappa, units)?,
        perturbed: integrate_passage(cfg, sol, charge, PathMode::Perturbed, kappa, units)?,
    })
}

/// Direction of `q v x B` for a charge crossing the solenoid interior.
pub fn lorentz_reference_direction(sol: &Solenoid, charge: &ChargeState, units: &UnitSystem) -> Result<Vec3> {
    if charge.velocity.norm() == 0.0 {
        return Err(Error::Domain("reference direction needs a moving charge".into()));
    }
    let b = solenoid_interior_b(sol, units);
    (charge.velocity.cross(b) * (charge.q / units.c))
        .normalized()
        .ok_or_else(|| Error::Domain("no Lorentz force: zero charge or zero interior field".into()))
}

fn passage_lag(
    cfg: &TrajectoryConfig,
    sol: &Solenoid,
    charge: &ChargeState,
    method: LagMethod,
    units: &UnitSystem,
) -> Result<(f64, f64, Vec<VelocitySample>)> {
    match method {
        LagMethod::ClosedForm => Ok((one_sided_lag(cfg, sol, charge, units), 0.0, Vec::new())),
        LagMethod::ImpulseQuadrature => Ok((impulse_lag_quadrature(cfg, sol, charge, units)?, 0.0, Vec::new())),
        LagMethod::Trajectory(mode) => {
            let report = integrate_trajectory(cfg, sol, charge, units)?;
            let p = match mode {
                PathMode::Unperturbed => report.unperturbed,
                PathMode::Perturbed => report.perturbed,
            };
            Ok((p.lag, p.tail_correction, p.history))
        }
    }
}

/// Relative lag between the two sides and the resulting deflection angle
/// `theta = -(lag(x0) - lag(-x0)) / d`, i.e. toward the lagging side.
///
/// The two configurations must be mirror images (`x0_left = -x0_right < 0`).
pub fn relative_displacement_and_angle(
    cfg_left: &TrajectoryConfig,
    cfg_right: &TrajectoryConfig,
    slit_separation: f64,
    sol: &Solenoid,
    charge: &ChargeState,
    method: LagMethod,
    units: &UnitSystem,
) -> Result<DeflectionResult> {
    if slit_separation.is_nan() || slit_separation <= 0.0 {
        return Err(Error::Domain(format!("slit separation must be positive, got {slit_separation}")));
    }
    if !(cfg_right.x0 > 0.0 && cfg_left == &cfg_right.mirrored()) {
        return Err(Error::Domain("left and right passages must differ only in the sign of x0".into()));
    }
    let (right, tail_r, history) = passage_lag(cfg_right, sol, charge, method, units)?;
    let (left, tail_l, _) = passage_lag(cfg_left, sol, charge, method, units)?;
    let delta_y_relative = right - left;
    let theta = -delta_y_relative / slit_separation;
    let moving = ChargeState { velocity: Vec3::Y * cfg_right.v, ..*charge };
    let reference = lorentz_reference_direction(sol, &moving, units).ok();
    Ok(DeflectionResult {
        model: DeflectionModel::ClassicalForce,
        delta_v: history,
        delta_y_one_side: Some(right),
        delta_y_relative,
        theta,
        direction: Direction::classify(theta, reference),
        tail_correction: tail_r - tail_l,
        slit_separation,
    })
}
