//! Orbit descriptors computed from phase-space states: the Runge-Lenz
//! vector, Kepler elements, apsis directions and the rotation of the orbit's
//! dipole direction between two instants.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::hamiltonians::{KeplerParams, PhaseState};
use crate::integrator::Trajectory;

/// Below this `|A|` the orbit counts as circular and has no apsis direction.
pub const DEGENERATE_APSIS: f64 = 1e-9;

/// `A = p x L - m q r / |r|`, pointing from the centre to the pericentre.
pub fn runge_lenz(state: &PhaseState, params: KeplerParams) -> Result<Vec3> {
    let radius = state.r.norm();
    if radius == 0.0 {
        return Err(Error::ZeroRadius);
    }
    let l = state.r.cross(state.p);
    Ok(state.p.cross(l) - state.r * (params.m * params.q / radius))
}

/// Unit normal of the instantaneous orbit plane, `L / |L|`.
pub fn plane_normal(state: &PhaseState) -> Result<Vec3> {
    let l = state.angular_momentum();
    let scale = state.r.norm() * state.p.norm();
    if !(l.norm() > 1e-14 * scale) || scale == 0.0 {
        return Err(Error::ZeroAngularMomentum);
    }
    Ok(l / l.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitElements {
    pub energy: f64,
    pub angular_momentum: Vec3,
    pub runge_lenz: Vec3,
    pub eccentricity: f64,
    pub semi_major: f64,
    pub period: f64,
}

impl OrbitElements {
    /// Unit vector towards the pericentre.
    pub fn perigee_dir(&self) -> Result<Vec3> {
        let magnitude = self.runge_lenz.norm();
        if magnitude < DEGENERATE_APSIS {
            return Err(Error::DegenerateApsis { magnitude });
        }
        Ok(self.runge_lenz / magnitude)
    }

    /// Unit vector towards the apocentre, `-perigee_dir`.
    pub fn apogee_dir(&self) -> Result<Vec3> {
        self.perigee_dir().map(|d| -d)
    }
}

/// Kepler elements of a bound state, treating the Coulomb centre as fixed at
/// the origin.
pub fn orbit_elements(state: &PhaseState, params: KeplerParams) -> Result<OrbitElements> {
    let radius = state.r.norm();
    if radius == 0.0 {
        return Err(Error::ZeroRadius);
    }
    let energy = state.p.norm_squared() / (2.0 * params.m) - params.q / radius;
    if !(energy < 0.0) {
        return Err(Error::UnboundOrbit { energy });
    }
    let a = runge_lenz(state, params)?;
    let semi_major = -params.q / (2.0 * energy);
    Ok(OrbitElements {
        energy,
        angular_momentum: state.angular_momentum(),
        runge_lenz: a,
        eccentricity: a.norm() / (params.m * params.q),
        semi_major,
        period: TAU * (params.m * semi_major.powi(3) / params.q).sqrt(),
    })
}

/// Angle between two dipole (apsis) directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleRotation {
    pub cos_phi: f64,
    /// `acos(cos_phi)` in `[0, pi]`.
    pub phi_unsigned: f64,
    /// Angle from the initial to the final direction, both projected onto the
    /// plane normal to `normal`, positive counter-clockwise about `normal`.
    pub signed_phi_in_plane: f64,
}

pub fn dipole_rotation(a_initial: Vec3, a_final: Vec3, normal: Vec3) -> Result<DipoleRotation> {
    let ui = a_initial
        .normalized()
        .ok_or(Error::ZeroVector("initial dipole direction"))?;
    let uf = a_final
        .normalized()
        .ok_or(Error::ZeroVector("final dipole direction"))?;
    let n = normal.normalized().ok_or(Error::ZeroVector("plane normal"))?;
    let cos_phi = ui.dot(uf).clamp(-1.0, 1.0);
    let (pi, pf) = (ui.reject_from(n), uf.reject_from(n));
    let signed = pi.cross(pf).dot(n).atan2(pi.dot(pf));
    Ok(DipoleRotation {
        cos_phi,
        phi_unsigned: cos_phi.acos(),
        signed_phi_in_plane: signed,
    })
}

/// States at the samples nearest `t0 + n T` for `n = 0, 1, ...` up to the
/// end of the trajectory.
pub fn stroboscopic(traj: &Trajectory, period: f64) -> Vec<(u64, PhaseState)> {
    if traj.is_empty() || !(period > 0.0) {
        return Vec::new();
    }
    let t0 = traj.times[0];
    let t_end = traj.times[traj.len() - 1];
    let count = ((t_end - t0) / period + 1e-9).floor() as u64;
    (0..=count)
        .map(|n| {
            let target = t0 + n as f64 * period;
            let i = traj.times.partition_point(|&t| t < target);
            let best = match i {
                0 => 0,
                i if i >= traj.len() => traj.len() - 1,
                i => {
                    if (traj.times[i] - target).abs() < (target - traj.times[i - 1]).abs() {
                        i
                    } else {
                        i - 1
                    }
                }
            };
            (n, traj.states[best])
        })
        .collect()
}

/// Times of pericentre passages (local minima of `|r|`), refined by a
/// parabola through the neighbouring samples.
pub fn pericentre_times(traj: &Trajectory) -> Vec<f64> {
    let radii: Vec<f64> = traj.states.iter().map(|s| s.r.norm()).collect();
    let mut out = Vec::new();
    for i in 1..radii.len().saturating_sub(1) {
        let (a, b, c) = (radii[i - 1], radii[i], radii[i + 1]);
        if b < a && b <= c {
            let (t0, t1, t2) = (traj.times[i - 1], traj.times[i], traj.times[i + 1]);
            let denom = (t0 - t1) * (t0 - t2) * (t1 - t2);
            let ca = (t2 * (b - a) + t1 * (a - c) + t0 * (c - b)) / denom;
            let cb = (t2 * t2 * (a - b) + t1 * t1 * (c - a) + t0 * t0 * (b - c)) / denom;
            out.push(if ca > 0.0 { -cb / (2.0 * ca) } else { t1 });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::HamiltonianSpec;
    use crate::integrator::{integrate, IntegratorConfig, Sampling, Scheme};
    use proptest::prelude::*;

    const UNIT: KeplerParams = KeplerParams { m: 1.0, q: 1.0 };

    fn fig2_ic() -> PhaseState {
        PhaseState::new(Vec3::X, Vec3::new(0.0, 0.75, 0.0))
    }

    #[test]
    fn runge_lenz_by_hand() {
        let a = runge_lenz(&fig2_ic(), UNIT).unwrap();
        assert_eq!(a, Vec3::new(-7.0 / 16.0, 0.0, 0.0));
        let circ = PhaseState::new(Vec3::X, Vec3::Y);
        assert_eq!(runge_lenz(&circ, UNIT).unwrap(), Vec3::ZERO);
        assert!(matches!(
            runge_lenz(&PhaseState::new(Vec3::ZERO, Vec3::Y), UNIT),
            Err(Error::ZeroRadius)
        ));
    }

    #[test]
    fn fig2_elements() {
        let el = orbit_elements(&fig2_ic(), UNIT).unwrap();
        assert!((el.energy + 0.71875).abs() < 1e-15);
        assert!((el.semi_major - 16.0 / 23.0).abs() < 1e-15);
        assert!((el.eccentricity - 7.0 / 16.0).abs() < 1e-15);
        assert!((el.period - 3.6456).abs() < 1e-4, "{}", el.period);
        // starts at apocentre: a (1 + e) = 1
        assert!((el.semi_major * (1.0 + el.eccentricity) - 1.0).abs() < 1e-15);
        assert!(el.apogee_dir().unwrap().max_abs_diff(Vec3::X) < 1e-15);
        assert_eq!(el.perigee_dir().unwrap(), -el.apogee_dir().unwrap());
    }

    #[test]
    fn circular_orbit_has_no_apsis() {
        let el = orbit_elements(&PhaseState::new(Vec3::X, Vec3::Y), UNIT).unwrap();
        assert_eq!(el.eccentricity, 0.0);
        assert!(matches!(el.perigee_dir(), Err(Error::DegenerateApsis { .. })));
    }

    #[test]
    fn unbound_orbit_rejected() {
        let s = PhaseState::new(Vec3::X, Vec3::new(0.0, 2.0, 0.0));
        assert!(matches!(orbit_elements(&s, UNIT), Err(Error::UnboundOrbit { .. })));
    }

    #[test]
    fn dipole_rotation_examples() {
        let a = Vec3::new(-0.4, 0.1, 0.0);
        let same = dipole_rotation(a, a, Vec3::Z).unwrap();
        assert!((same.cos_phi - 1.0).abs() < 1e-15);
        let flip = dipole_rotation(a, -a, Vec3::Z).unwrap();
        assert!((flip.cos_phi + 1.0).abs() < 1e-15);
        let (s, c) = (std::f64::consts::FRAC_PI_3).sin_cos();
        let rotated = Vec3::new(c * a.x - s * a.y, s * a.x + c * a.y, 0.0);
        let r = dipole_rotation(a, rotated, Vec3::Z).unwrap();
        assert!((r.cos_phi - 0.5).abs() < 1e-15);
        assert!((r.signed_phi_in_plane - std::f64::consts::FRAC_PI_3).abs() < 1e-15);
        assert!(dipole_rotation(Vec3::ZERO, a, Vec3::Z).is_err());
    }

    #[test]
    fn plane_normal_examples() {
        assert_eq!(plane_normal(&fig2_ic()).unwrap(), Vec3::Z);
        let xz = PhaseState::new(Vec3::X, Vec3::new(0.0, 0.0, 0.75));
        assert_eq!(plane_normal(&xz).unwrap(), Vec3::new(0.0, -1.0, 0.0));
        let radial = PhaseState::new(Vec3::X, Vec3::new(0.3, 0.0, 0.0));
        assert!(matches!(plane_normal(&radial), Err(Error::ZeroAngularMomentum)));
    }

    fn kepler_run(periods: f64, n_per_orbit: f64) -> (Trajectory, f64) {
        let el = orbit_elements(&fig2_ic(), UNIT).unwrap();
        let spec = HamiltonianSpec::kepler(UNIT);
        let cfg = IntegratorConfig::new(Scheme::Yoshida3, el.period / n_per_orbit).unwrap();
        let traj = integrate(&spec, &fig2_ic(), 0.0, periods * el.period, &cfg, Sampling::Stride(1))
            .unwrap();
        (traj, el.period)
    }

    #[test]
    fn stroboscopic_one_period() {
        let (traj, t) = kepler_run(1.0, 500.0);
        let strobe = stroboscopic(&traj, t);
        assert_eq!(strobe.iter().map(|s| s.0).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn stroboscopic_kepler_states_repeat() {
        let (traj, t) = kepler_run(5.0, 4000.0);
        let strobe = stroboscopic(&traj, t);
        assert_eq!(strobe.len(), 6);
        for (_, s) in &strobe {
            assert!(s.max_abs_diff(&fig2_ic()) < 1e-6);
        }
    }

    #[test]
    fn runge_lenz_conserved_along_kepler_flow() {
        let (traj, _) = kepler_run(3.0, 2000.0);
        let a0 = runge_lenz(&traj.states[0], UNIT).unwrap();
        for s in &traj.states {
            let a = runge_lenz(s, UNIT).unwrap();
            assert!((a - a0).norm() <= 1e-7 * a0.norm());
        }
    }

    #[test]
    fn period_matches_pericentre_passages() {
        let (traj, t) = kepler_run(6.0, 20000.0);
        let passages = pericentre_times(&traj);
        assert_eq!(passages.len(), 6);
        for w in passages.windows(2) {
            assert!(((w[1] - w[0]) - t).abs() <= 1e-4 * t);
        }
    }

    fn bound_state() -> impl Strategy<Value = PhaseState> {
        (0.5..2.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.1..0.9f64, -0.9..0.9f64, -0.5..0.5f64)
            .prop_map(|(rx, ry, rz, px, py, pz)| {
                PhaseState::new(Vec3::new(rx, ry, rz), Vec3::new(px * 0.5, py, pz))
            })
            .prop_filter("bound", |s| s.p.norm_squared() / 2.0 - 1.0 / s.r.norm() < -0.05)
    }

    proptest! {
        #[test]
        fn element_invariants(s in bound_state(), m in 0.5..2.0f64, q in 0.5..2.0f64) {
            let params = KeplerParams::new(m, q).unwrap();
            prop_assume!(s.p.norm_squared() / (2.0 * m) - q / s.r.norm() < -1e-3);
            let el = orbit_elements(&s, params).unwrap();
            let scale = el.runge_lenz.norm().max(1.0) * el.angular_momentum.norm().max(1.0);
            prop_assert!((el.runge_lenz.norm() - m * q * el.eccentricity).abs() <= 1e-10);
            prop_assert!((el.semi_major + q / (2.0 * el.energy)).abs() <= 1e-10 * el.semi_major);
            prop_assert!(el.runge_lenz.dot(el.angular_momentum).abs() <= 1e-10 * scale);
        }

        #[test]
        fn rotation_about_normal_recovered(alpha in -3.1..3.1f64, tilt in 0.0..1.5f64) {
            // plane normal tilted away from z, A in that plane
            let n = Vec3::new(tilt.sin(), 0.0, tilt.cos());
            let a = Vec3::new(0.0, 1.0, 0.0);
            let b = n.cross(a);
            let rotated = a * alpha.cos() + b * alpha.sin();
            let r = dipole_rotation(a, rotated, n).unwrap();
            prop_assert!((r.cos_phi - alpha.cos()).abs() <= 1e-12);
            prop_assert!((r.phi_unsigned.cos() - r.cos_phi).abs() <= 1e-12);
            prop_assert!((r.signed_phi_in_plane - alpha).abs() <= 1e-12);
        }
    }
}
