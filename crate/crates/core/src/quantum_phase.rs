//! Semiclassical path phase `(1/hbar) [p L + (q/c) int A . dr]` and the
//! two-path Aharonov-Bohm phase difference.
//!
//! The `-E t` term is omitted: both paths arrive at the same time, so it
//! cancels from every comparison made here.

use serde::{Deserialize, Serialize};

use crate::dynamics::{lorentz_reference_direction, DeflectionModel, DeflectionResult, Direction};
use crate::em_fields::{ChargeState, Solenoid, UnitSystem, VectorPotential};
use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Polyline from the source through one slit to a screen point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    points: Vec<Vec3>,
    side: Side,
}

impl PathSpec {
    /// Validates that no segment enters the solenoid cross-section and
    /// subdivides segments near the solenoid to pieces of at most `R / 4`.
    pub fn new(points: Vec<Vec3>, side: Side, sol: &Solenoid) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Domain("a path needs at least two waypoints".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("path waypoints must be finite".into()));
        }
        let r = sol.radius();
        let mut refined = vec![points[0]];
        for pair in points.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let closest = segment_axis_distance(a, b);
            if closest <= r {
                return Err(Error::Domain(format!(
                    "segment {a} -> {b} passes within {closest:e} of the axis (R = {r})"
                )));
            }
            let len = (b - a).norm();
            let pieces = if closest < 4.0 * r { (len / (0.25 * r)).ceil().max(1.0) as usize } else { 1 };
            for k in 1..=pieces {
                refined.push(a + (b - a) * (k as f64 / pieces as f64));
            }
        }
        Ok(Self { points: refined, side })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn start(&self) -> Vec3 {
        self.points[0]
    }

    pub fn end(&self) -> Vec3 {
        *self.points.last().expect("non-empty path")
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Net angle swept about the `z` axis, from `atan2` of the waypoints.
    pub fn swept_angle(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| {
                let a = w[0].y.atan2(w[0].x);
                let b = w[1].y.atan2(w[1].x);
                let mut d = b - a;
                while d > std::f64::consts::PI {
                    d -= 2.0 * std::f64::consts::PI;
                }
                while d < -std::f64::consts::PI {
                    d += 2.0 * std::f64::consts::PI;
                }
                d
            })
            .sum()
    }
}

/// Distance from the `z` axis to the in-plane projection of segment `a b`.
fn segment_axis_distance(a: Vec3, b: Vec3) -> f64 {
    let a2 = Vec3::new(a.x, a.y, 0.0);
    let d = Vec3::new(b.x - a.x, b.y - a.y, 0.0);
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return a2.norm();
    }
    let s = (-a2.dot(d) / len2).clamp(0.0, 1.0);
    (a2 + d * s).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumConfig {
    pub hbar: f64,
    /// Magnitude of the mechanical momentum.
    pub p: f64,
    pub m: f64,
}

impl QuantumConfig {
    pub fn new(hbar: f64, p: f64, m: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Domain(format!("hbar must be positive, got {hbar}")));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Domain(format!("momentum must be positive, got {p}")));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Domain(format!("mass must be positive, got {m}")));
        }
        Ok(Self { hbar, p, m })
    }

    pub fn energy(&self) -> f64 {
        self.p * self.p / (2.0 * self.m)
    }

    pub fn de_broglie_wavelength(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.hbar / self.p
    }
}

/// A vector potential plus the gradient of a single-valued scalar.
pub struct GaugeShifted<'a, P: ?Sized, G> {
    pub base: &'a P,
    pub gradient: G,
}

impl<P, G> VectorPotential for GaugeShifted<'_, P, G>
where
    P: VectorPotential + ?Sized,
    G: Fn(Vec3) -> Vec3,
{
    fn vector_potential(&self, point: Vec3, units: &UnitSystem) -> Result<Vec3> {
        Ok(self.base.vector_potential(point, units)? + (self.gradient)(point))
    }

    fn excluded_disk(&self) -> Option<(Vec3, f64)> {
        self.base.excluded_disk()
    }
}

/// `int A . dr` along the path by adaptive Gauss-Kronrod on each segment.
pub fn line_integral<P: VectorPotential + ?Sized>(path: &PathSpec, potential: &P, units: &UnitSystem) -> Result<f64> {
    let mut total = 0.0;
    for w in path.points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let d = b - a;
        let mid = potential.vector_potential(a + d * 0.5, units)?;
        let scale = mid.norm() * d.norm();
        let mut failure = None;
        let est = quadrature::integrate(
            |s: f64| match potential.vector_potential(a + d * s, units) {
                Ok(v) => v.dot(d),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            1.0,
            Tolerance::new(1e-16 * scale, 1e-14),
            400,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        total += est.value;
    }
    Ok(total)
}

/// Phase accumulated along the path in an arbitrary vector potential.
pub fn path_phase_in<P: VectorPotential + ?Sized>(
    path: &PathSpec,
    qc: &QuantumConfig,
    potential: &P,
    q: f64,
    units: &UnitSystem,
) -> Result<f64> {
    Ok((qc.p * path.length() + q / units.c * line_integral(path, potential, units)?) / qc.hbar)
}

/// Phase `(1/hbar) [p L + (q/c) int A . dr]` along the path in the solenoid's potential.
pub fn path_phase(path: &PathSpec, qc: &QuantumConfig, sol: &Solenoid, q: f64, units: &UnitSystem) -> Result<f64> {
    path_phase_in(path, qc, sol, q, units)
}

/// Phase of the right-hand path minus that of the left-hand path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseDifference {
    pub total: f64,
    /// `p (L_right - L_left) / hbar`.
    pub mechanical: f64,
    /// `(q / (hbar c)) (int_right A . dr - int_left A . dr)`.
    pub aharonov_bohm: f64,
    /// Whether the loop formed by the two paths winds around the solenoid.
    pub encloses_flux: bool,
}

/// Phase difference between two paths sharing their end points.
pub fn two_path_phase_difference_in<P: VectorPotential + ?Sized>(
    left: &PathSpec,
    right: &PathSpec,
    qc: &QuantumConfig,
    potential: &P,
    q: f64,
    units: &UnitSystem,
) -> Result<PhaseDifference> {
    let span = (left.end() - left.start()).norm().max(1.0);
    if (left.start() - right.start()).norm() > 1e-12 * span || (left.end() - right.end()).norm() > 1e-12 * span {
        return Err(Error::Domain("paths must share their source and screen points".into()));
    }
    let winding = (right.swept_angle() - left.swept_angle()) / (2.0 * std::f64::consts::PI);
    let encloses_flux = winding.round() != 0.0;
    if !encloses_flux {
        log::warn!("paths do not enclose the solenoid; no Aharonov-Bohm phase");
    }
    let mechanical = qc.p * (right.length() - left.length()) / qc.hbar;
    let circulation = line_integral(right, potential, units)? - line_integral(left, potential, units)?;
    let aharonov_bohm = q * circulation / (qc.hbar * units.c);
    Ok(PhaseDifference { total: mechanical + aharonov_bohm, mechanical, aharonov_bohm, encloses_flux })
}

pub fn two_path_phase_difference(
    left: &PathSpec,
    right: &PathSpec,
    qc: &QuantumConfig,
    sol: &Solenoid,
    q: f64,
    units: &UnitSystem,
) -> Result<PhaseDifference> {
    two_path_phase_difference_in(left, right, qc, sol, q, units)
}

/// Mirror-symmetric source-slit-screen paths around a solenoid at the origin:
/// source `(0, -D)`, slits at `x = +-d/2` open over `|y| <= g`, screen point `(0, D)`.
pub fn symmetric_slit_paths(sol: &Solenoid, slit_separation: f64, distance: f64) -> Result<(PathSpec, PathSpec)> {
    let half = 0.5 * slit_separation;
    if half <= sol.radius() {
        return Err(Error::Domain(format!(
            "solenoid radius {} does not fit between slits {slit_separation} apart",
            sol.radius()
        )));
    }
    let gap = 2.0 * sol.radius();
    if distance <= gap {
        return Err(Error::Domain("source distance must exceed the slit region".into()));
    }
    let build = |x: f64, side| {
        PathSpec::new(
            vec![
                Vec3::new(0.0, -distance, 0.0),
                Vec3::new(x, -gap, 0.0),
                Vec3::new(x, gap, 0.0),
                Vec3::new(0.0, distance, 0.0),
            ],
            side,
            sol,
        )
    };
    Ok((build(-half, Side::Left)?, build(half, Side::Right)?))
}

/// Quantum deflection angle `theta = dphi lambda / (2 pi d)` of the fringe comb
/// for a beam along `+y`, with `dphi` from line integrals along the
/// symmetric slit paths. Equals `q Phi / (p c d)` in magnitude.
pub fn quantum_deflection(
    qc: &QuantumConfig,
    sol: &Solenoid,
    q: f64,
    slit_separation: f64,
    units: &UnitSystem,
) -> Result<DeflectionResult> {
    if slit_separation.is_nan() || slit_separation <= 0.0 {
        return Err(Error::Domain(format!("slit separation must be positive, got {slit_separation}")));
    }
    let (left, right) = symmetric_slit_paths(sol, slit_separation, 50.0 * slit_separation)?;
    let dphi = two_path_phase_difference(&left, &right, qc, sol, q, units)?;
    let lambda = qc.de_broglie_wavelength();
    let theta = dphi.total * lambda / (2.0 * std::f64::consts::PI * slit_separation);
    let charge = ChargeState::new(q, qc.m, Vec3::ZERO, Vec3::Y * (qc.p / qc.m))?;
    let reference = lorentz_reference_direction(sol, &charge, units).ok();
    Ok(DeflectionResult {
        model: DeflectionModel::QuantumPhase,
        delta_v: Vec::new(),
        delta_y_one_side: None,
        delta_y_relative: -theta * slit_separation,
        theta,
        direction: Direction::classify(theta, reference),
        tail_correction: 0.0,
        slit_separation,
    })
}
