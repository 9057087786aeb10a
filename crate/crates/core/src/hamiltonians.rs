//! Potentials, forces and energies of the three simulated systems:
//!
//! * a Kepler electron around a slowly moving nucleus,
//! * the Kepler problem plus a harmonic confinement along a fixed axis,
//! * the same with the confinement axis driven by an [`AnisotropyProtocol`].
//!
//! All evaluators are pure; time enters only through the driving protocol or
//! the nucleus path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{anisotropy_axis, Vec3};
use crate::protocols::{AnisotropyProtocol, NucleusPath};

/// Default minimum allowed distance to the Coulomb centre.
pub const DEFAULT_R_MIN_GUARD: f64 = 1e-3;

/// Electron position and momentum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseState {
    pub r: Vec3,
    pub p: Vec3,
}

impl PhaseState {
    pub const fn new(r: Vec3, p: Vec3) -> Self {
        Self { r, p }
    }

    pub fn angular_momentum(&self) -> Vec3 {
        self.r.cross(self.p)
    }

    /// Same position, momentum reversed.
    pub fn flipped(&self) -> Self {
        Self::new(self.r, -self.p)
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.p.is_finite()
    }

    /// Largest absolute component difference over position and momentum.
    pub fn max_abs_diff(&self, other: &PhaseState) -> f64 {
        self.r.max_abs_diff(other.r).max(self.p.max_abs_diff(other.p))
    }
}

/// Electron mass and Coulomb strength (`V = -q / |r|`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeplerParams {
    pub m: f64,
    pub q: f64,
}

impl Default for KeplerParams {
    fn default() -> Self {
        Self { m: 1.0, q: 1.0 }
    }
}

impl KeplerParams {
    /// `q = 0` is accepted so the Coulomb term can be switched off.
    pub fn new(m: f64, q: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Domain(format!("mass must be > 0, got {m}")));
        }
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::Domain(format!("Coulomb strength must be >= 0, got {q}")));
        }
        Ok(Self { m, q })
    }
}

/// Which system is simulated.
#[derive(Debug, Clone, PartialEq)]
pub enum System {
    /// Pure Coulomb attraction to a nucleus following `path`.
    MovingNucleus(NucleusPath),
    /// Confinement `m w0^2 z^2 / 2` along the fixed z axis.
    FixedAnisotropy,
    /// Confinement `m w0^2 (Z . r)^2 / 2` along the driven axis `Z(t)`.
    RotatingAnisotropy(AnisotropyProtocol),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub system: System,
    pub kepler: KeplerParams,
    /// Anisotropy frequency; enters squared.
    pub omega0: f64,
    pub r_min_guard: f64,
}

impl HamiltonianSpec {
    pub fn moving_nucleus(kepler: KeplerParams, path: NucleusPath) -> Self {
        Self {
            system: System::MovingNucleus(path),
            kepler,
            omega0: 0.0,
            r_min_guard: DEFAULT_R_MIN_GUARD,
        }
    }

    /// Static pure Kepler problem centred at the origin.
    pub fn kepler(kepler: KeplerParams) -> Self {
        Self {
            system: System::FixedAnisotropy,
            kepler,
            omega0: 0.0,
            r_min_guard: DEFAULT_R_MIN_GUARD,
        }
    }

    pub fn fixed_anisotropy(kepler: KeplerParams, omega0: f64) -> Result<Self> {
        check_omega0(omega0)?;
        Ok(Self {
            system: System::FixedAnisotropy,
            kepler,
            omega0,
            r_min_guard: DEFAULT_R_MIN_GUARD,
        })
    }

    pub fn rotating_anisotropy(
        kepler: KeplerParams,
        omega0: f64,
        protocol: AnisotropyProtocol,
    ) -> Result<Self> {
        check_omega0(omega0)?;
        Ok(Self {
            system: System::RotatingAnisotropy(protocol),
            kepler,
            omega0,
            r_min_guard: DEFAULT_R_MIN_GUARD,
        })
    }

    pub fn with_r_min_guard(mut self, guard: f64) -> Result<Self> {
        if !(guard > 0.0 && guard.is_finite()) {
            return Err(Error::Domain(format!("r_min_guard must be > 0, got {guard}")));
        }
        self.r_min_guard = guard;
        Ok(self)
    }

    /// `true` when the potential has no explicit time dependence.
    pub fn is_static(&self) -> bool {
        match &self.system {
            System::MovingNucleus(NucleusPath::Static(_)) | System::FixedAnisotropy => true,
            System::MovingNucleus(_) => false,
            System::RotatingAnisotropy(p) => {
                matches!(p, AnisotropyProtocol::Constant { .. }) || self.omega0 == 0.0
            }
        }
    }

    /// Position of the Coulomb centre at `t`.
    pub fn nucleus(&self, t: f64) -> Vec3 {
        match &self.system {
            System::MovingNucleus(path) => path.position(t),
            _ => Vec3::ZERO,
        }
    }

    /// Velocity of the Coulomb centre at `t`.
    pub fn nucleus_velocity(&self, t: f64) -> Vec3 {
        match &self.system {
            System::MovingNucleus(path) => path.velocity(t),
            _ => Vec3::ZERO,
        }
    }

    /// Unit anisotropy axis at `t`, if the system has one.
    pub fn axis(&self, t: f64) -> Option<Vec3> {
        match &self.system {
            System::MovingNucleus(_) => None,
            System::FixedAnisotropy => Some(Vec3::Z),
            System::RotatingAnisotropy(p) => Some(anisotropy_axis(p.eval(t).angles())),
        }
    }

    /// State seen from the nucleus: position and momentum relative to the
    /// moving Coulomb centre. Identity for the anisotropic systems.
    pub fn relative_state(&self, state: &PhaseState, t: f64) -> PhaseState {
        match &self.system {
            System::MovingNucleus(path) => PhaseState::new(
                state.r - path.position(t),
                state.p - path.velocity(t) * self.kepler.m,
            ),
            _ => *state,
        }
    }

    fn coulomb_offset(&self, r: Vec3, t: f64) -> Result<Vec3> {
        let d = r - self.nucleus(t);
        if self.kepler.q > 0.0 {
            let radius = d.norm();
            if !(radius > self.r_min_guard) {
                return Err(Error::MinRadiusViolation {
                    t,
                    radius,
                    guard: self.r_min_guard,
                });
            }
        }
        Ok(d)
    }

    /// `(m w0^2, axis)` of the harmonic term at `t`, or `None` when absent.
    fn confinement(&self, t: f64) -> Option<(f64, Vec3)> {
        if self.omega0 == 0.0 {
            return None;
        }
        let k = self.kepler.m * self.omega0 * self.omega0;
        self.axis(t).map(|axis| (k, axis))
    }

    pub fn potential_energy(&self, r: Vec3, t: f64) -> Result<f64> {
        let d = self.coulomb_offset(r, t)?;
        let mut v = if self.kepler.q > 0.0 {
            -self.kepler.q / d.norm()
        } else {
            0.0
        };
        if let Some((k, axis)) = self.confinement(t) {
            let s = axis.dot(r);
            v += 0.5 * k * s * s;
        }
        Ok(v)
    }

    /// `-grad V`, evaluated analytically.
    pub fn force(&self, r: Vec3, t: f64) -> Result<Vec3> {
        let d = self.coulomb_offset(r, t)?;
        let mut f = if self.kepler.q > 0.0 {
            let r2 = d.norm_squared();
            d * (-self.kepler.q / (r2 * r2.sqrt()))
        } else {
            Vec3::ZERO
        };
        if let Some((k, axis)) = self.confinement(t) {
            f -= axis * (k * axis.dot(r));
        }
        Ok(f)
    }

    pub fn kinetic_energy(&self, p: Vec3) -> f64 {
        p.norm_squared() / (2.0 * self.kepler.m)
    }

    pub fn total_energy(&self, state: &PhaseState, t: f64) -> Result<f64> {
        Ok(self.kinetic_energy(state.p) + self.potential_energy(state.r, t)?)
    }

    /// Energy in the rest frame of the nucleus: kinetic term of
    /// `p - m dR/dt` plus the potential. Equal to [`Self::total_energy`]
    /// unless the nucleus moves.
    pub fn comoving_energy(&self, state: &PhaseState, t: f64) -> Result<f64> {
        let p = state.p - self.nucleus_velocity(t) * self.kepler.m;
        Ok(self.kinetic_energy(p) + self.potential_energy(state.r, t)?)
    }
}

fn check_omega0(omega0: f64) -> Result<()> {
    if !(omega0 >= 0.0 && omega0.is_finite()) {
        return Err(Error::Domain(format!("omega0 must be >= 0, got {omega0}")));
    }
    Ok(())
}
