//! Closed-form predictions for the adiabatic loop of the anisotropy axis:
//! swept solid angle, the Hannay shift between radial and angular phases,
//! and the resulting rotation of the orbit's dipole direction. Also the
//! ponderomotive confinement frequency used to pick `omega0`.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{check_colatitude, FrameAngles};
use crate::protocols::AnisotropyProtocol;

const CLOSURE_TOL: f64 = 1e-9;

/// Fewer samples per winding than this triggers a density warning.
pub const MIN_SAMPLES_PER_WINDING: f64 = 64.0;

/// Sampled path of the anisotropy axis on the unit sphere, `phi` unwrapped.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopOnSphere {
    samples: Vec<FrameAngles>,
}

impl LoopOnSphere {
    pub fn new(samples: Vec<FrameAngles>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Domain("a loop needs at least two samples".into()));
        }
        for s in &samples {
            check_colatitude(s.theta)?;
            if !s.phi.is_finite() {
                return Err(Error::Domain("non-finite azimuth in loop".into()));
            }
        }
        Ok(Self { samples })
    }

    /// `n + 1` evenly spaced samples of a protocol over its window.
    pub fn from_protocol(protocol: &AnisotropyProtocol, n: usize) -> Result<Self> {
        let (a, b) = protocol.window();
        if !(a.is_finite() && b.is_finite()) || n == 0 {
            return Err(Error::Domain("protocol has no finite window to sample".into()));
        }
        let samples = (0..=n)
            .map(|i| {
                let t = if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
                protocol.eval(t).angles()
            })
            .collect();
        Self::new(samples)
    }

    pub fn samples(&self) -> &[FrameAngles] {
        &self.samples
    }

    fn gaps(&self) -> (f64, f64) {
        let (first, last) = (self.samples[0], self.samples[self.samples.len() - 1]);
        let dphi = last.phi - first.phi;
        (
            (last.theta - first.theta).abs(),
            (dphi - TAU * (dphi / TAU).round()).abs(),
        )
    }

    pub fn is_closed(&self) -> bool {
        let (t, p) = self.gaps();
        t <= CLOSURE_TOL && p <= CLOSURE_TOL
    }

    /// Net number of turns of the azimuth.
    pub fn winding(&self) -> i64 {
        let dphi = self.samples[self.samples.len() - 1].phi - self.samples[0].phi;
        (dphi / TAU).round() as i64
    }

    fn require_closed(&self) -> Result<()> {
        if self.is_closed() {
            return Ok(());
        }
        let (theta_gap, phi_gap) = self.gaps();
        Err(Error::OpenLoop { theta_gap, phi_gap })
    }

    fn warn_if_sparse(&self) {
        let w = self.winding().unsigned_abs().max(1) as f64;
        let per = (self.samples.len() - 1) as f64 / w;
        if per < MIN_SAMPLES_PER_WINDING {
            log::warn!("loop has only {per:.0} samples per winding (< {MIN_SAMPLES_PER_WINDING})");
        }
    }

    /// Trapezoidal `sum f(theta) dphi` over consecutive samples.
    fn integrate_dphi(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.samples
            .windows(2)
            .map(|w| 0.5 * (f(w[0].theta) + f(w[1].theta)) * (w[1].phi - w[0].phi))
            .sum()
    }
}

/// Solid angle enclosed by a constant-colatitude circle, `2 pi (1 - cos theta)`.
pub fn solid_angle_const_theta(theta: f64) -> Result<f64> {
    check_colatitude(theta)?;
    Ok(TAU * (1.0 - theta.cos()))
}

/// Hannay shift `closed integral of cos(theta) dphi`.
pub fn hannay_shift(path: &LoopOnSphere) -> Result<f64> {
    path.require_closed()?;
    path.warn_if_sparse();
    Ok(path.integrate_dphi(f64::cos))
}

/// Predicted dipole rotation, the swept solid angle
/// `closed integral of (1 - cos theta) dphi`.
pub fn predicted_rotation(path: &LoopOnSphere) -> Result<f64> {
    path.require_closed()?;
    path.warn_if_sparse();
    Ok(path.integrate_dphi(|t| 1.0 - t.cos()))
}

/// `cos(2 pi (1 - cos theta))` for one winding at fixed colatitude.
pub fn predicted_cos_phi(theta: f64) -> Result<f64> {
    solid_angle_const_theta(theta).map(f64::cos)
}

/// Frequency of the harmonic confinement produced by a standing-wave AC
/// field of wavenumber `k` and angular frequency `omega` on a particle of
/// charge `charge` and mass `mass`: `charge k / (sqrt(2) mass omega)`.
pub fn ponderomotive_omega0(charge: f64, k: f64, mass: f64, omega: f64) -> Result<f64> {
    for (name, v) in [("charge", charge), ("wavenumber", k), ("mass", mass), ("frequency", omega)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
        }
    }
    Ok(charge * k / (2f64.sqrt() * mass * omega))
}

/// Ponderomotive potential `charge^2 E0^2 / (4 mass omega^2)` for local field
/// amplitude `e0`.
pub fn ponderomotive_potential(charge: f64, e0: f64, mass: f64, omega: f64) -> Result<f64> {
    for (name, v) in [("charge", charge), ("mass", mass), ("frequency", omega)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
        }
    }
    Ok(charge * charge * e0 * e0 / (4.0 * mass * omega * omega))
}

/// Unsigned dipole rotation for one winding, folded into `[0, pi]`.
pub fn folded_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a > PI {
        TAU - a
    } else {
        a
    }
}
