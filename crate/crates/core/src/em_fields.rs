//! Fields of the passing charge and of the infinite solenoid, Gaussian units,
//! through order `1/c^2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Speed of light in cm/s.
pub const SPEED_OF_LIGHT_CGS: f64 = 2.997_924_58e10;

/// Gaussian unit system with an adjustable speed of light.
///
/// Desk-scale scenarios use `c` of order 10-100 in problem units; only the
/// `1/c^2` bookkeeping matters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub c: f64,
    /// `|v|/c` above which a charge is flagged as not slow.
    pub max_beta: f64,
}

impl UnitSystem {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("speed of light must be positive, got {c}")));
        }
        Ok(Self { c, max_beta: 0.1 })
    }

    pub fn with_max_beta(mut self, max_beta: f64) -> Self {
        self.max_beta = max_beta;
        self
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self { c: SPEED_OF_LIGHT_CGS, max_beta: 0.1 }
    }
}

/// Infinite circular solenoid on the `z` axis carrying azimuthal surface
/// current `K = nI`. Positive `K` gives an interior field along `+z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solenoid {
    radius: f64,
    surface_current: f64,
}

impl Solenoid {
    pub fn new(radius: f64, surface_current: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("solenoid radius must be positive, got {radius}")));
        }
        if !surface_current.is_finite() {
            return Err(Error::Domain("surface current must be finite".into()));
        }
        Ok(Self { radius, surface_current })
    }

    /// Solenoid whose interior flux is `flux` for the given unit system.
    pub fn with_flux(radius: f64, flux: f64, units: &UnitSystem) -> Result<Self> {
        Self::new(radius, flux * units.c / (4.0 * PI * PI * radius * radius))
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn surface_current(&self) -> f64 {
        self.surface_current
    }

    /// `+1` for an interior field along `+z`, `-1` along `-z`, `0` without current.
    pub fn handedness(&self) -> f64 {
        if self.surface_current == 0.0 {
            0.0
        } else {
            self.surface_current.signum()
        }
    }

    /// Signed interior field `B_z = 4 pi K / c`.
    pub fn interior_field(&self, units: &UnitSystem) -> f64 {
        4.0 * PI * self.surface_current / units.c
    }

    /// Signed flux `4 pi^2 K R^2 / c`.
    pub fn flux(&self, units: &UnitSystem) -> f64 {
        4.0 * PI * PI * self.surface_current * self.radius * self.radius / units.c
    }

    /// Magnetic moment per unit length, `pi R^2 K / c` along `z`.
    pub fn moment_per_length(&self, units: &UnitSystem) -> Vec3 {
        Vec3::Z * (PI * self.radius * self.radius * self.surface_current / units.c)
    }

    pub fn contains(&self, point: Vec3) -> bool {
        point.rho() < self.radius
    }
}

/// Point charge with its kinematic state in the solenoid rest frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeState {
    pub q: f64,
    pub m: f64,
    pub position: Vec3,
    pub velocity: Vec3,
}

impl ChargeState {
    pub fn new(q: f64, m: f64, position: Vec3, velocity: Vec3) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Domain(format!("mass must be positive, got {m}")));
        }
        if !q.is_finite() || !position.is_finite() || !velocity.is_finite() {
            return Err(Error::Domain("charge state must be finite".into()));
        }
        Ok(Self { q, m, position, velocity })
    }

    /// Charge moving along `+y` with speed `v`, at `(x0, v t, 0)`.
    pub fn on_beam_line(q: f64, m: f64, x0: f64, v: f64, t: f64) -> Result<Self> {
        Self::new(q, m, Vec3::new(x0, v * t, 0.0), Vec3::new(0.0, v, 0.0))
    }

    pub fn at(mut self, position: Vec3) -> Self {
        self.position = position;
        self
    }

    pub fn momentum(&self) -> f64 {
        self.m * self.velocity.norm()
    }

    /// `|v| / c`; logs a warning above `units.max_beta`.
    pub fn beta(&self, units: &UnitSystem) -> f64 {
        let beta = self.velocity.norm() / units.c;
        if beta > units.max_beta {
            log::warn!("charge speed is {beta:.3} c; order 1/c^2 fields are not accurate");
        }
        beta
    }
}

/// Magnetic field of a slowly moving charge, `B = (q/c) v x (r - r_q) / |r - r_q|^3`.
pub fn b_field_of_moving_charge(charge: &ChargeState, field_point: Vec3, units: &UnitSystem) -> Result<Vec3> {
    let sep = field_point - charge.position;
    let r2 = sep.norm_squared();
    if r2 == 0.0 {
        return Err(Error::Singularity(format!("field point {field_point} coincides with the charge")));
    }
    let r3 = r2 * r2.sqrt();
    let b = charge.velocity.cross(sep) * (charge.q / (units.c * r3));
    if b.is_finite() {
        Ok(b)
    } else {
        Err(Error::Singularity(format!("field overflow at {field_point}")))
    }
}

/// Uniform interior field `z * 4 pi K / c`. The exterior field is zero.
pub fn solenoid_interior_b(sol: &Solenoid, units: &UnitSystem) -> Vec3 {
    Vec3::Z * sol.interior_field(units)
}

/// Vector potential in the symmetric gauge: azimuthal, `2 pi K rho / c`
/// inside and `Phi / (2 pi rho)` outside.
pub fn solenoid_vector_potential(sol: &Solenoid, field_point: Vec3, units: &UnitSystem) -> Result<Vec3> {
    let rho = field_point.rho();
    let r = sol.radius();
    if (rho - r).abs() <= 1e-12 * r {
        return Err(Error::Singularity(format!("field point {field_point} lies on the current sheet")));
    }
    if rho == 0.0 {
        return Ok(Vec3::ZERO);
    }
    let a_phi = if rho < r {
        2.0 * PI * sol.surface_current() * rho / units.c
    } else {
        sol.flux(units) / (2.0 * PI * rho)
    };
    let phi_hat = Vec3::new(-field_point.y / rho, field_point.x / rho, 0.0);
    Ok(phi_hat * a_phi)
}

/// A static vector potential that can be line-integrated along paths.
pub trait VectorPotential {
    fn vector_potential(&self, point: Vec3, units: &UnitSystem) -> Result<Vec3>;

    /// Cross-section the paths must avoid, as `(center, radius)` in the `xy` plane.
    fn excluded_disk(&self) -> Option<(Vec3, f64)> {
        None
    }
}

impl VectorPotential for Solenoid {
    fn vector_potential(&self, point: Vec3, units: &UnitSystem) -> Result<Vec3> {
        solenoid_vector_potential(self, point, units)
    }

    fn excluded_disk(&self) -> Option<(Vec3, f64)> {
        Some((Vec3::ZERO, self.radius))
    }
}
