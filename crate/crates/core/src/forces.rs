//! Order `1/c^2` forces between a passing charge and the solenoid.
//!
//! Three independent routes are provided: the leading-order closed form for
//! the magnetic force on the solenoid, a brute-force surface quadrature of
//! the Lorentz force density that uses only the Biot-Savart field of the
//! charge, and the electrostatic force on the charge from the line of
//! electric dipoles the solenoid carries in the charge rest frame.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::em_fields::{b_field_of_moving_charge, ChargeState, Solenoid, UnitSystem};
use crate::error::{Error, Result};
use crate::quadrature::{self, richardson, Tolerance};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForceTarget {
    OnSolenoid,
    OnCharge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForceMethod {
    ClosedForm,
    SurfaceQuadrature,
    DipoleLineElectrostatic,
}

/// Force at one instant, tagged with what it acts on and how it was computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceSample {
    pub t: f64,
    pub force: Vec3,
    pub target: ForceTarget,
    pub method: ForceMethod,
    /// Absolute error estimate; zero for closed forms.
    pub error_estimate: f64,
}

impl ForceSample {
    fn new(t: f64, force: Vec3, target: ForceTarget, method: ForceMethod, error_estimate: f64) -> Result<Self> {
        if !force.is_finite() {
            return Err(Error::Singularity(format!("non-finite force at t = {t}")));
        }
        Ok(Self { t, force, target, method, error_estimate })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ForceHistory {
    pub samples: Vec<ForceSample>,
}

impl ForceHistory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }
}

/// Straight passage `r = x x0 + y v t` of a charge `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamPath {
    pub q: f64,
    pub v: f64,
    pub x0: f64,
}

impl BeamPath {
    pub fn new(q: f64, v: f64, x0: f64) -> Self {
        Self { q, v, x0 }
    }

    pub fn position(&self, t: f64) -> Vec3 {
        Vec3::new(self.x0, self.v * t, 0.0)
    }

    /// Charge state on the path at time `t` (the mass does not enter any force).
    pub fn charge_at(&self, t: f64) -> Result<ChargeState> {
        ChargeState::on_beam_line(self.q, 1.0, self.x0, self.v, t)
    }
}

/// Settings for [`force_on_solenoid_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Starting azimuthal point count; doubled until converged.
    pub phi_points: usize,
    pub max_phi_points: usize,
    /// Panel budget of the adaptive rule along `z` (after `z = a tan u`).
    pub max_z_panels: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { phi_points: 16, max_phi_points: 1 << 16, max_z_panels: 200, abs_tol: 1e-300, rel_tol: 1e-12 }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if self.phi_points < 8 {
            return Err(Error::Domain(format!("phi_points must be >= 8, got {}", self.phi_points)));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Domain("quadrature tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Smallest `|x0| / R` accepted by the leading-order closed form.
pub const CLOSED_FORM_MIN_RATIO: f64 = 20.0;

/// Leading-order magnetic force on the solenoid from a charge passing outside,
///
/// `F = (2 pi q v K R^2 / c^2) [x (x0^2 - (vt)^2) + y 2 x0 vt] / (x0^2 + (vt)^2)^2`.
pub fn force_on_solenoid_closed_form(sol: &Solenoid, path: &BeamPath, t: f64, units: &UnitSystem) -> Result<ForceSample> {
    if path.x0.abs() < CLOSED_FORM_MIN_RATIO * sol.radius() {
        return Err(Error::Domain(format!(
            "closed form needs |x0| >= {CLOSED_FORM_MIN_RATIO} R (x0 = {}, R = {})",
            path.x0,
            sol.radius()
        )));
    }
    let force = closed_form_kernel(sol, path.q, path.v, path.x0, path.v * t, units);
    ForceSample::new(t, force, ForceTarget::OnSolenoid, ForceMethod::ClosedForm, 0.0)
}

/// The closed-form force on the solenoid for a charge with longitudinal
/// velocity `v` at in-plane position `(x, y)`, without domain checks.
pub(crate) fn closed_form_kernel(sol: &Solenoid, q: f64, v: f64, x: f64, y: f64, units: &UnitSystem) -> Vec3 {
    let r = sol.radius();
    let prefactor = 2.0 * PI * q * v * sol.surface_current() * r * r / (units.c * units.c);
    let d = x * x + y * y;
    let d2 = d * d;
    Vec3::new(prefactor * (x * x - y * y) / d2, prefactor * 2.0 * x * y / d2, 0.0)
}

/// Force on the solenoid for a charge inside at its center, `-x 2 pi q v K / c^2`
/// for `v` along `+y`.
pub fn force_on_solenoid_inside_center(sol: &Solenoid, q: f64, v: f64, units: &UnitSystem) -> Vec3 {
    Vec3::X * (-2.0 * PI * q * v * sol.surface_current() / (units.c * units.c))
}

/// Magnetic Lorentz force on the solenoid by direct integration of the surface
/// force density `(K/c) phi_hat x B_q` over the whole current sheet.
///
/// `t` only labels the sample. The `z` integral runs over the real line via
/// `z = z_q + a tan u` with `a` the in-plane distance from the charge to the
/// surface generator at `phi`; the `phi` integral uses the periodic trapezoid
/// rule.
pub fn force_on_solenoid_quadrature(
    sol: &Solenoid,
    charge: &ChargeState,
    t: f64,
    spec: &QuadratureSpec,
    units: &UnitSystem,
) -> Result<ForceSample> {
    spec.validate()?;
    let r = sol.radius();
    if (charge.position.rho() - r).abs() <= 1e-9 * r {
        return Err(Error::Singularity("charge lies on the solenoid surface".into()));
    }
    let k_over_c = sol.surface_current() / units.c;
    // The inner rule is run tighter than the outer one so the trapezoid
    // convergence test sees a smooth integrand.
    let inner_tol = Tolerance::new(spec.abs_tol, spec.rel_tol * 1e-2);
    let mut inner_error = 0.0_f64;
    let per_phi = |phi: f64| -> Result<Vec3> {
        let (s, c) = phi.sin_cos();
        let dx = r * c - charge.position.x;
        let dy = r * s - charge.position.y;
        let a = dx.hypot(dy);
        if a <= 1e-12 * r {
            return Err(Error::Singularity(format!("charge on surface generator phi = {phi}")));
        }
        let phi_hat = Vec3::new(-s, c, 0.0);
        let mut failure = None;
        let est = quadrature::integrate_real_line(
            |dz: f64| {
                let point = Vec3::new(r * c, r * s, charge.position.z + dz);
                match b_field_of_moving_charge(charge, point, units) {
                    Ok(b) => phi_hat.cross(b) * (r * k_over_c),
                    Err(e) => {
                        failure.get_or_insert(e);
                        Vec3::ZERO
                    }
                }
            },
            a,
            inner_tol,
            spec.max_z_panels,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        inner_error = inner_error.max(est.error);
        Ok(est.value)
    };
    let outer = quadrature::integrate_periodic(
        per_phi,
        2.0 * PI,
        spec.phi_points,
        spec.max_phi_points,
        Tolerance::new(spec.abs_tol, spec.rel_tol),
    )?;
    let error = outer.error + 2.0 * PI * inner_error;
    ForceSample::new(t, outer.value, ForceTarget::OnSolenoid, ForceMethod::SurfaceQuadrature, error)
}

/// Antiderivative of `(z^2 + a^2)^(-5/2)`, `(3 a^2 z + 2 z^3) / (3 a^4 (z^2 + a^2)^(3/2))`.
///
/// Defined at `z = +-inf` by its limits `+-2 / (3 a^4)`.
pub fn inverse_five_halves_antiderivative(z: f64, a: f64) -> f64 {
    let a2 = a * a;
    if z.is_infinite() {
        return z.signum() * 2.0 / (3.0 * a2 * a2);
    }
    let s = z * z + a2;
    (3.0 * a2 * z + 2.0 * z * z * z) / (3.0 * a2 * a2 * s * s.sqrt())
}

/// Numerical `int_{-z_max}^{z_max} dz (z^2 + a^2)^(-5/2)` minus the same
/// interval evaluated through [`inverse_five_halves_antiderivative`].
///
/// `z_max` may be `f64::INFINITY`.
pub fn integral_identity_check(a: f64, z_max: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("a must be positive, got {a}")));
    }
    if z_max.is_nan() || z_max < 0.0 {
        return Err(Error::Domain(format!("z_max must be non-negative, got {z_max}")));
    }
    let integrand = |z: f64| (z * z + a * a).powf(-2.5);
    let tol = Tolerance::new(0.0, 1e-14);
    let numeric = if z_max.is_infinite() {
        quadrature::integrate_real_line(integrand, a, tol, 500)?.value
    } else {
        quadrature::integrate(integrand, -z_max, z_max, tol, 500)?.value
    };
    let analytic = inverse_five_halves_antiderivative(z_max, a) - inverse_five_halves_antiderivative(-z_max, a);
    Ok(numeric - analytic)
}

/// Line of electric dipoles carried by the solenoid in the rest frame of the
/// charge, pictured as line charges `+lambda` and `-lambda` a distance
/// `epsilon` apart along `orientation`, centred on the solenoid axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleLine {
    pub lambda: f64,
    pub epsilon: f64,
    /// Unit vector from `-lambda` to `+lambda`; zero when the density vanishes.
    pub orientation: Vec3,
    /// Dipole moment per unit length.
    pub dipole_density: Vec3,
}

impl DipoleLine {
    /// Dipole line with density `p` and separation `epsilon`.
    pub fn new(dipole_density: Vec3, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("dipole separation must be positive, got {epsilon}")));
        }
        let p = dipole_density.norm();
        Ok(Self {
            lambda: p / epsilon,
            epsilon,
            orientation: dipole_density.normalized().unwrap_or(Vec3::ZERO),
            dipole_density,
        })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.dipole_density, epsilon)
    }

    /// In-plane positions of the `+lambda` and `-lambda` lines.
    pub fn line_positions(&self) -> (Vec3, Vec3) {
        let half = self.orientation * (0.5 * self.epsilon);
        (half, -half)
    }

    /// Field of the two finite-separation line charges, `E = 2 lambda rho_hat / rho` each.
    pub fn field(&self, point: Vec3) -> Result<Vec3> {
        let rho = Vec3::new(point.x, point.y, 0.0).norm();
        if rho < 10.0 * self.epsilon {
            return Err(Error::Domain(format!(
                "query point at rho = {rho:e} is within 10 epsilon ({:e}) of the dipole line",
                self.epsilon
            )));
        }
        let (plus, minus) = self.line_positions();
        Ok(line_charge_field(self.lambda, plus, point) + line_charge_field(-self.lambda, minus, point))
    }

    /// Limit `epsilon -> 0`: `E = 2 [2 (p . rho_hat) rho_hat - p] / rho^2`.
    pub fn point_dipole_field(&self, point: Vec3) -> Result<Vec3> {
        point_dipole_line_field(self.dipole_density, point)
    }
}

fn line_charge_field(lambda: f64, line: Vec3, point: Vec3) -> Vec3 {
    let sep = Vec3::new(point.x - line.x, point.y - line.y, 0.0);
    sep * (2.0 * lambda / sep.norm_squared())
}

pub(crate) fn point_dipole_line_field(p: Vec3, point: Vec3) -> Result<Vec3> {
    let rho_vec = Vec3::new(point.x, point.y, 0.0);
    let rho2 = rho_vec.norm_squared();
    if rho2 == 0.0 {
        return Err(Error::Singularity("field requested on the dipole line".into()));
    }
    let rho_hat = rho_vec / rho2.sqrt();
    Ok((rho_hat * (2.0 * p.dot(rho_hat)) - p) * (2.0 / rho2))
}

/// Dipole density acquired by the solenoid moving with `-v` in the charge
/// rest frame: `p = (-v) x m / c` per unit length with `m = z pi R^2 K / c`.
pub fn dipole_density_from_boost(sol: &Solenoid, v: Vec3, units: &UnitSystem) -> Vec3 {
    (-v).cross(sol.moment_per_length(units)) / units.c
}

/// Primed-frame dipole line for a charge moving with velocity `v`. The
/// separation defaults to `1e-3 R`; use [`DipoleLine::with_epsilon`] to change it.
pub fn dipole_line_from_boost(sol: &Solenoid, v: Vec3, units: &UnitSystem) -> Result<DipoleLine> {
    if v.norm() >= 0.5 * units.c {
        return Err(Error::Domain(format!("boost speed {} is not small compared with c", v.norm())));
    }
    DipoleLine::new(dipole_density_from_boost(sol, v, units), 1e-3 * sol.radius())
}

/// Electrostatic force `q (E_lambda + E_-lambda)` on the charge, with the
/// charge position taken relative to the solenoid axis.
pub fn force_on_charge_from_dipole_line(
    dl: &DipoleLine,
    charge: &ChargeState,
    t: f64,
    units: &UnitSystem,
) -> Result<ForceSample> {
    let _ = units;
    let e = dl.field(charge.position)?;
    ForceSample::new(t, e * charge.q, ForceTarget::OnCharge, ForceMethod::DipoleLineElectrostatic, 0.0)
}

/// Separation, relative to the distance from the line, used by [`force_on_charge_extrapolated`].
pub const DIPOLE_EPSILON_FRACTION: f64 = 1e-3;

/// Dipole-line force extrapolated to `epsilon -> 0` from separations
/// `1e-3 rho` and `5e-4 rho` (the finite-separation error is even in `epsilon`).
pub fn force_on_charge_extrapolated(
    dl: &DipoleLine,
    charge: &ChargeState,
    t: f64,
    units: &UnitSystem,
) -> Result<ForceSample> {
    let rho = charge.position.rho();
    let eps = DIPOLE_EPSILON_FRACTION * rho;
    let coarse = force_on_charge_from_dipole_line(&dl.with_epsilon(eps)?, charge, t, units)?;
    let fine = force_on_charge_from_dipole_line(&dl.with_epsilon(0.5 * eps)?, charge, t, units)?;
    let force = richardson(coarse.force, fine.force, 2.0, 2);
    let error = (fine.force - force).max_abs();
    ForceSample::new(t, force, ForceTarget::OnCharge, ForceMethod::DipoleLineElectrostatic, error)
}

/// Samples the force on the solenoid along `path` at `times` by `method`.
///
/// `ClosedForm` and `SurfaceQuadrature` give the force on the solenoid;
/// `DipoleLineElectrostatic` gives the (extrapolated) force on the charge.
/// Output order follows `times`.
pub fn force_profile(
    sol: &Solenoid,
    path: &BeamPath,
    times: &[f64],
    method: ForceMethod,
    spec: &QuadratureSpec,
    units: &UnitSystem,
) -> Result<ForceHistory> {
    let samples = times
        .par_iter()
        .map(|&t| match method {
            ForceMethod::ClosedForm => force_on_solenoid_closed_form(sol, path, t, units),
            ForceMethod::SurfaceQuadrature => {
                force_on_solenoid_quadrature(sol, &path.charge_at(t)?, t, spec, units)
            }
            ForceMethod::DipoleLineElectrostatic => {
                let dl = dipole_line_from_boost(sol, Vec3::Y * path.v, units)?;
                force_on_charge_extrapolated(&dl, &path.charge_at(t)?, t, units)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForceHistory { samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> UnitSystem {
        UnitSystem::new(1.0).unwrap()
    }

    #[test]
    fn closed_form_at_closest_approach() {
        let (q, v, k, r, x0, c) = (1.5, 0.3, 2.0, 0.05, 1.7, 10.0);
        let u = UnitSystem::new(c).unwrap();
        let sol = Solenoid::new(r, k).unwrap();
        let f = force_on_solenoid_closed_form(&sol, &BeamPath::new(q, v, x0), 0.0, &u).unwrap();
        let expect = 2.0 * PI * q * v * k * r * r / (c * c * x0 * x0);
        assert!((f.force.x - expect).abs() < 1e-15 * expect);
        assert_eq!(f.force.y, 0.0);
        assert_eq!(f.method, ForceMethod::ClosedForm);
    }

    #[test]
    fn closed_form_zero_current_and_decay() {
        let sol = Solenoid::new(0.01, 0.0).unwrap();
        let path = BeamPath::new(1.0, 1.0, 1.0);
        assert_eq!(force_on_solenoid_closed_form(&sol, &path, 3.0, &unit()).unwrap().force, Vec3::ZERO);
        let sol = Solenoid::new(0.01, 1.0).unwrap();
        let far = force_on_solenoid_closed_form(&sol, &path, 1e8, &unit()).unwrap().force;
        assert!(far.max_abs() < 1e-18);
    }

    #[test]
    fn closed_form_side_symmetry() {
        let sol = Solenoid::new(0.02, 1.0).unwrap();
        for t in [-2.0, -0.5, 0.7, 3.0] {
            let a = force_on_solenoid_closed_form(&sol, &BeamPath::new(1.0, 1.0, 1.0), t, &unit()).unwrap().force;
            let b = force_on_solenoid_closed_form(&sol, &BeamPath::new(1.0, 1.0, -1.0), t, &unit()).unwrap().force;
            assert_eq!(a.x, b.x);
            assert_eq!(a.y, -b.y);
        }
    }

    #[test]
    fn closed_form_rejects_close_passage() {
        let sol = Solenoid::new(0.1, 1.0).unwrap();
        assert!(matches!(
            force_on_solenoid_closed_form(&sol, &BeamPath::new(1.0, 1.0, 1.0), 0.0, &unit()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn quadrature_linear_in_charge() {
        let sol = Solenoid::new(0.05, 1.0).unwrap();
        let spec = QuadratureSpec::default();
        let a = ChargeState::on_beam_line(1.0, 1.0, 1.0, 1.0, 0.4).unwrap();
        let b = ChargeState { q: -1.0, ..a };
        let fa = force_on_solenoid_quadrature(&sol, &a, 0.4, &spec, &unit()).unwrap().force;
        let fb = force_on_solenoid_quadrature(&sol, &b, 0.4, &spec, &unit()).unwrap().force;
        assert!((fa + fb).max_abs() <= 1e-14 * fa.max_abs());
    }

    #[test]
    fn quadrature_rejects_surface_charge() {
        let sol = Solenoid::new(0.5, 1.0).unwrap();
        let q = ChargeState::on_beam_line(1.0, 1.0, 0.5, 1.0, 0.0).unwrap();
        assert!(force_on_solenoid_quadrature(&sol, &q, 0.0, &QuadratureSpec::default(), &unit()).is_err());
        let bad = QuadratureSpec { phi_points: 4, ..QuadratureSpec::default() };
        let q = ChargeState::on_beam_line(1.0, 1.0, 2.0, 1.0, 0.0).unwrap();
        assert!(force_on_solenoid_quadrature(&sol, &q, 0.0, &bad, &unit()).is_err());
    }

    #[test]
    fn quadrature_budget_exhaustion_is_reported() {
        let sol = Solenoid::new(0.5, 1.0).unwrap();
        let q = ChargeState::on_beam_line(1.0, 1.0, 0.5001, 1.0, 0.0).unwrap();
        let spec = QuadratureSpec { phi_points: 8, max_phi_points: 16, ..QuadratureSpec::default() };
        assert!(matches!(
            force_on_solenoid_quadrature(&sol, &q, 0.0, &spec, &unit()),
            Err(Error::Quadrature { .. })
        ));
    }

    #[test]
    fn antiderivative_properties() {
        assert_eq!(inverse_five_halves_antiderivative(0.0, 1.3), 0.0);
        for z in [0.1, 1.0, 7.0] {
            let a = 0.8;
            assert_eq!(inverse_five_halves_antiderivative(-z, a), -inverse_five_halves_antiderivative(z, a));
        }
        assert!(integral_identity_check(0.0, 1.0).is_err());
    }

    #[test]
    fn dipole_line_signs() {
        // B = +z, v = +y: +lambda toward -x, -lambda toward +x.
        let sol = Solenoid::new(0.05, 1.0).unwrap();
        let dl = dipole_line_from_boost(&sol, Vec3::Y * 0.2, &unit()).unwrap();
        let (plus, minus) = dl.line_positions();
        assert!(plus.x < 0.0 && minus.x > 0.0);
        assert!((dl.lambda * dl.epsilon - dl.dipole_density.norm()).abs() < 1e-18);
        let still = dipole_line_from_boost(&sol, Vec3::ZERO, &unit()).unwrap();
        assert_eq!(still.dipole_density, Vec3::ZERO);
        assert_eq!(still.lambda, 0.0);
    }

    #[test]
    fn dipole_density_magnitude_unit_inputs() {
        let sol = Solenoid::new(1.0, 1.0).unwrap();
        let p = dipole_density_from_boost(&sol, Vec3::Y, &unit());
        assert!((p - Vec3::X * (-PI)).max_abs() < 1e-15);
    }

    #[test]
    fn dipole_force_too_close() {
        let sol = Solenoid::new(0.05, 1.0).unwrap();
        let dl = dipole_line_from_boost(&sol, Vec3::Y * 0.1, &unit()).unwrap().with_epsilon(0.1).unwrap();
        let q = ChargeState::on_beam_line(1.0, 1.0, 0.5, 0.1, 0.0).unwrap();
        assert!(force_on_charge_from_dipole_line(&dl, &q, 0.0, &unit()).is_err());
    }

    #[test]
    fn zero_density_gives_zero_force() {
        let dl = DipoleLine::new(Vec3::ZERO, 1e-3).unwrap();
        let q = ChargeState::on_beam_line(1.0, 1.0, 1.0, 1.0, 0.3).unwrap();
        assert_eq!(force_on_charge_from_dipole_line(&dl, &q, 0.3, &unit()).unwrap().force, Vec3::ZERO);
    }
}
