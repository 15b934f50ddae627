//! Far-field double-slit patterns: a `cos^2` fringe comb inside a `sinc^2`
//! single-slit envelope, and sub-sample measurement of both.
//!
//! Phase convention: `phase_offset` is the phase of the right-slit wave
//! minus the left-slit wave. A positive offset moves the comb toward `+x`
//! by `phase_offset * lambda * L / (2 pi d)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlitGeometry {
    pub slit_width: f64,
    pub slit_separation: f64,
    pub screen_distance: f64,
    /// De Broglie wavelength for matter, optical wavelength for light.
    pub wavelength: f64,
}

impl SlitGeometry {
    pub fn new(slit_width: f64, slit_separation: f64, screen_distance: f64, wavelength: f64) -> Result<Self> {
        for (name, v) in [
            ("slit width", slit_width),
            ("slit separation", slit_separation),
            ("screen distance", screen_distance),
            ("wavelength", wavelength),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if slit_width >= slit_separation {
            return Err(Error::Domain(format!("slit width {slit_width} must be below the separation {slit_separation}")));
        }
        let fraunhofer = 100.0 * slit_separation * slit_separation / wavelength;
        if screen_distance < fraunhofer {
            log::warn!("screen distance {screen_distance} is inside the far-field limit {fraunhofer}");
        }
        Ok(Self { slit_width, slit_separation, screen_distance, wavelength })
    }

    pub fn with_wavelength(&self, wavelength: f64) -> Result<Self> {
        Self::new(self.slit_width, self.slit_separation, self.screen_distance, wavelength)
    }

    /// Distance between adjacent bright fringes, `lambda L / d`.
    pub fn fringe_spacing(&self) -> f64 {
        self.wavelength * self.screen_distance / self.slit_separation
    }

    /// Comb displacement produced by a phase offset.
    pub fn comb_offset(&self, phase_offset: f64) -> f64 {
        phase_offset * self.fringe_spacing() / (2.0 * PI)
    }

    /// Half-width of the sampled screen window: half the central envelope lobe.
    pub fn half_window(&self) -> f64 {
        0.5 * self.wavelength * self.screen_distance / self.slit_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FringeModel {
    QuantumAB,
    ClassicalLag,
    DipoleLineElectrostatic,
    GlassPlate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringePattern {
    pub model: FringeModel,
    pub geometry: SlitGeometry,
    pub phase_offset: f64,
    pub x: Vec<f64>,
    pub intensity: Vec<f64>,
    pub envelope: Vec<f64>,
    pub comb_phase: Vec<f64>,
    /// Nominal envelope centre (always zero in the far-field model).
    pub envelope_center: f64,
    /// Nominal comb displacement implied by `phase_offset`.
    pub fringe_comb_offset: f64,
}

impl FringePattern {
    pub fn samples_per_fringe(&self) -> f64 {
        if self.x.len() < 2 {
            return 0.0;
        }
        self.geometry.fringe_spacing() / (self.x[1] - self.x[0])
    }

    /// Samples as a table with columns `x_s, intensity, envelope, comb_phase`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["x_s", "intensity", "envelope", "comb_phase"]);
        for i in 0..self.x.len() {
            t.push_nums(&[self.x[i], self.intensity[i], self.envelope[i], self.comb_phase[i]]);
        }
        t
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// `I(x) = sinc^2(pi a x / (lambda L)) cos^2(pi d x / (lambda L) - dphi / 2)`
/// on a symmetric grid over half the central envelope lobe. `n_samples` is
/// rounded up to an odd count so `x = 0` is sampled.
pub fn synthesize_pattern(geom: &SlitGeometry, phase_offset: f64, n_samples: usize, model: FringeModel) -> FringePattern {
    let n = (n_samples.max(3)) | 1;
    let half = geom.half_window();
    let scale = PI / (geom.wavelength * geom.screen_distance);
    let mut x = Vec::with_capacity(n);
    let mut intensity = Vec::with_capacity(n);
    let mut envelope = Vec::with_capacity(n);
    let mut comb_phase = Vec::with_capacity(n);
    let mid = (n / 2) as f64;
    for k in 0..n {
        let xs = half * (k as f64 - mid) / mid;
        let env = sinc(scale * geom.slit_width * xs).powi(2);
        let phase = scale * geom.slit_separation * xs - 0.5 * phase_offset;
        x.push(xs);
        envelope.push(env);
        comb_phase.push(phase);
        intensity.push(env * phase.cos().powi(2));
    }
    FringePattern {
        model,
        geometry: *geom,
        phase_offset,
        x,
        intensity,
        envelope,
        comb_phase,
        envelope_center: 0.0,
        fringe_comb_offset: geom.comb_offset(phase_offset),
    }
}

/// Pattern from a relative longitudinal lag `delta_y_rel = lag(right) - lag(left)`.
/// The lagging side's wave carries the larger phase, so the comb moves toward it.
pub fn pattern_from_classical_lag(geom: &SlitGeometry, delta_y_rel: f64, n_samples: usize) -> FringePattern {
    pattern_from_lag(geom, delta_y_rel, n_samples, FringeModel::ClassicalLag)
}

/// Electrostatic dipole-line deflection, same lag-to-phase mapping as [`pattern_from_classical_lag`].
pub fn pattern_from_dipole_line_lag(geom: &SlitGeometry, delta_y_rel: f64, n_samples: usize) -> FringePattern {
    pattern_from_lag(geom, delta_y_rel, n_samples, FringeModel::DipoleLineElectrostatic)
}

fn pattern_from_lag(geom: &SlitGeometry, delta_y_rel: f64, n_samples: usize, model: FringeModel) -> FringePattern {
    let phase = -2.0 * PI * delta_y_rel / geom.wavelength;
    synthesize_pattern(geom, phase, n_samples, model)
}

/// Pattern for an Aharonov-Bohm phase difference (right minus left).
pub fn pattern_from_quantum_phase(geom: &SlitGeometry, delta_phi: f64, n_samples: usize) -> FringePattern {
    synthesize_pattern(geom, delta_phi, n_samples, FringeModel::QuantumAB)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoveredSlit {
    Left,
    Right,
}

/// Glass plate behind one slit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlassPlate {
    pub thickness: f64,
    pub index: f64,
    pub covered_slit: CoveredSlit,
}

impl GlassPlate {
    pub fn new(thickness: f64, index: f64, covered_slit: CoveredSlit) -> Result<Self> {
        if !(index >= 1.0 && index.is_finite()) {
            return Err(Error::Domain(format!("refractive index must be >= 1, got {index}")));
        }
        if !(thickness >= 0.0 && thickness.is_finite()) {
            return Err(Error::Domain(format!("plate thickness must be non-negative, got {thickness}")));
        }
        Ok(Self { thickness, index, covered_slit })
    }

    /// Extra optical path `(n - 1) t` on the covered slit.
    pub fn lag(&self) -> f64 {
        (self.index - 1.0) * self.thickness
    }

    /// Signed angle `lag / d`, toward the covered slit.
    pub fn deflection(&self, slit_separation: f64) -> f64 {
        let theta = self.lag() / slit_separation;
        match self.covered_slit {
            CoveredSlit::Right => theta,
            CoveredSlit::Left => -theta,
        }
    }
}

pub fn pattern_from_glass_plate(geom: &SlitGeometry, plate: &GlassPlate, n_samples: usize) -> FringePattern {
    let phase = 2.0 * PI * plate.lag() / geom.wavelength;
    let phase = match plate.covered_slit {
        CoveredSlit::Right => phase,
        CoveredSlit::Left => -phase,
    };
    synthesize_pattern(geom, phase, n_samples, FringeModel::GlassPlate)
}

/// Minimum sampling accepted by [`measure_deflection`].
pub const MIN_SAMPLES_PER_FRINGE: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredDeflection {
    /// Signed comb deflection angle `comb_offset / L`.
    pub theta: f64,
    /// Screen position of the tracked bright fringe.
    pub comb_offset: f64,
    /// Screen position of the envelope maximum.
    pub envelope_shift: f64,
}

/// Measures the comb displacement of the bright fringe nearest `x = 0` and the
/// envelope centre.
pub fn measure_deflection(pattern: &FringePattern) -> Result<MeasuredDeflection> {
    measure_deflection_near(pattern, 0.0)
}

/// As [`measure_deflection`], tracking the bright fringe nearest `expected_offset`.
///
/// The comb is periodic, so a single pattern fixes the offset only modulo one
/// fringe spacing; sweeps follow one fringe by passing the previous result.
///
/// The comb is demodulated as `intensity / envelope`. Its peak is located by
/// three-point quadratic interpolation, then the known interpolation bias for
/// a sampled `cos^2` of the geometry's spatial frequency is inverted exactly:
/// for phase step `psi` per sample, the parabola returns
/// `tan(psi delta) / (2 tan(psi / 2))` for a true offset `delta`.
pub fn measure_deflection_near(pattern: &FringePattern, expected_offset: f64) -> Result<MeasuredDeflection> {
    let n = pattern.x.len();
    if n < 3 {
        return Err(Error::Domain("pattern has fewer than three samples".into()));
    }
    let spf = pattern.samples_per_fringe();
    if spf < MIN_SAMPLES_PER_FRINGE {
        return Err(Error::Domain(format!(
            "pattern is undersampled: {spf:.1} samples per fringe (need {MIN_SAMPLES_PER_FRINGE})"
        )));
    }
    let dx = pattern.x[1] - pattern.x[0];
    let env_max = pattern.envelope.iter().copied().fold(0.0, f64::max);
    let comb: Vec<f64> = pattern
        .intensity
        .iter()
        .zip(&pattern.envelope)
        .map(|(i, e)| if *e > 1e-6 * env_max { i / e } else { 0.0 })
        .collect();

    let peak = (1..n - 1)
        .filter(|&k| comb[k] >= comb[k - 1] && comb[k] > comb[k + 1])
        .min_by(|&a, &b| {
            (pattern.x[a] - expected_offset).abs().total_cmp(&(pattern.x[b] - expected_offset).abs())
        })
        .ok_or_else(|| Error::Domain("no interior fringe maximum".into()))?;
    let raw = parabolic_vertex(comb[peak - 1], comb[peak], comb[peak + 1]);
    let psi = 2.0 * PI * dx / pattern.geometry.fringe_spacing();
    let delta = (2.0 * (0.5 * psi).tan() * raw).atan() / psi;
    let comb_offset = pattern.x[peak] + delta * dx;

    let env_peak = (0..n)
        .max_by(|&a, &b| pattern.envelope[a].total_cmp(&pattern.envelope[b]))
        .expect("non-empty");
    let envelope_shift = if env_peak == 0 || env_peak == n - 1 {
        pattern.x[env_peak]
    } else {
        let e = &pattern.envelope;
        pattern.x[env_peak] + parabolic_vertex(e[env_peak - 1], e[env_peak], e[env_peak + 1]) * dx
    };

    Ok(MeasuredDeflection {
        theta: comb_offset / pattern.geometry.screen_distance,
        comb_offset,
        envelope_shift,
    })
}

/// Vertex offset, in samples, of the parabola through three equally spaced points.
fn parabolic_vertex(prev: f64, center: f64, next: f64) -> f64 {
    let curvature = prev - 2.0 * center + next;
    if curvature == 0.0 {
        return 0.0;
    }
    (0.5 * (prev - next) / curvature).clamp(-0.5, 0.5)
}
