//! Time-dependent driving: the anisotropy-axis path `(theta(t), phi(t))` and
//! the nucleus path `R(t)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_colatitude, FrameAngles, Vec3};

/// Closure tolerance for knot loops.
const LOOP_CLOSURE_TOL: f64 = 1e-9;

/// Half-width of the tanh ramp window in units of `tau`.
pub const TANH_WINDOW_TAUS: f64 = 5.0;

/// Loops slower than this many orbital periods count as adiabatic.
pub const ADIABATIC_LOOP_RATIO: f64 = 50.0;

/// Instantaneous state of an anisotropy protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSample {
    pub theta: f64,
    pub phi: f64,
    pub theta_dot: f64,
    pub phi_dot: f64,
}

impl ProtocolSample {
    pub fn angles(&self) -> FrameAngles {
        FrameAngles::new(self.theta, self.phi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnisotropyProtocol {
    /// Axis held fixed.
    Constant { theta: f64, phi: f64 },
    /// Fixed colatitude, `phi(t) = pi (1 + tanh(t / tau))` on `(-5 tau, 5 tau)`.
    TanhRamp { theta: f64, tau: f64 },
    /// Closed loop through user-given knots.
    KnotLoop(KnotLoop),
}

impl AnisotropyProtocol {
    pub fn constant(theta: f64, phi: f64) -> Result<Self> {
        FrameAngles::checked(theta, phi)?;
        Ok(Self::Constant { theta, phi })
    }

    pub fn tanh_ramp(theta: f64, tau: f64) -> Result<Self> {
        check_colatitude(theta)?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Domain(format!("ramp time tau must be > 0, got {tau}")));
        }
        Ok(Self::TanhRamp { theta, tau })
    }

    pub fn knot_loop(knots: &[(f64, f64, f64)]) -> Result<Self> {
        KnotLoop::new(knots).map(Self::KnotLoop)
    }

    /// Time window over which the protocol drives; infinite for `Constant`.
    pub fn window(&self) -> (f64, f64) {
        match self {
            Self::Constant { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::TanhRamp { tau, .. } => (-TANH_WINDOW_TAUS * tau, TANH_WINDOW_TAUS * tau),
            Self::KnotLoop(k) => (k.times[0], *k.times.last().unwrap()),
        }
    }

    /// Evaluate the axis angles and their rates at time `t`. Outside the
    /// window the angles are clamped to their endpoint values and the rates
    /// are zero.
    pub fn eval(&self, t: f64) -> ProtocolSample {
        match self {
            Self::Constant { theta, phi } => ProtocolSample {
                theta: *theta,
                phi: *phi,
                theta_dot: 0.0,
                phi_dot: 0.0,
            },
            Self::TanhRamp { theta, tau } => {
                let edge = TANH_WINDOW_TAUS * tau;
                let (s, inside) = if t < -edge {
                    (-edge, false)
                } else if t > edge {
                    (edge, false)
                } else {
                    (t, true)
                };
                let th = (s / tau).tanh();
                let phi_dot = if inside {
                    // sech^2 = 1 - tanh^2
                    PI / tau * (1.0 - th * th)
                } else {
                    0.0
                };
                ProtocolSample {
                    theta: *theta,
                    phi: PI * (1.0 + th),
                    theta_dot: 0.0,
                    phi_dot,
                }
            }
            Self::KnotLoop(k) => k.eval(t),
        }
    }

    /// Gap between the start and end azimuth and a whole number of turns.
    pub fn closure_residual(&self) -> f64 {
        let (a, b) = self.window();
        if !a.is_finite() {
            return 0.0;
        }
        let (s, e) = (self.eval(a), self.eval(b));
        let dphi = e.phi - s.phi;
        (dphi - TAU * (dphi / TAU).round()).abs() + (e.theta - s.theta).abs()
    }
}

/// Knot-defined loop interpolated with a monotone piecewise cubic (C1) in
/// each of `theta` and `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotLoop {
    times: Vec<f64>,
    theta: Vec<f64>,
    phi: Vec<f64>,
    theta_slopes: Vec<f64>,
    phi_slopes: Vec<f64>,
}

impl KnotLoop {
    /// `knots` are `(t, theta, phi)` with strictly increasing `t`.
    pub fn new(knots: &[(f64, f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Domain("a knot loop needs at least two knots".into()));
        }
        let times: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let theta: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let phi: Vec<f64> = knots.iter().map(|k| k.2).collect();
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("knot times must be strictly increasing".into()));
        }
        for &th in &theta {
            check_colatitude(th)?;
        }
        let theta_gap = (theta[theta.len() - 1] - theta[0]).abs();
        let dphi = phi[phi.len() - 1] - phi[0];
        let phi_gap = (dphi - TAU * (dphi / TAU).round()).abs();
        if theta_gap > LOOP_CLOSURE_TOL || phi_gap > LOOP_CLOSURE_TOL {
            return Err(Error::OpenLoop { theta_gap, phi_gap });
        }
        let theta_slopes = monotone_slopes(&times, &theta);
        let phi_slopes = monotone_slopes(&times, &phi);
        Ok(Self {
            times,
            theta,
            phi,
            theta_slopes,
            phi_slopes,
        })
    }

    fn eval(&self, t: f64) -> ProtocolSample {
        let n = self.times.len();
        if t <= self.times[0] || t >= self.times[n - 1] {
            let i = if t <= self.times[0] { 0 } else { n - 1 };
            return ProtocolSample {
                theta: self.theta[i],
                phi: self.phi[i],
                theta_dot: 0.0,
                phi_dot: 0.0,
            };
        }
        let i = self.times.partition_point(|&x| x <= t) - 1;
        let (theta, theta_dot) = hermite(&self.times, &self.theta, &self.theta_slopes, i, t);
        let (phi, phi_dot) = hermite(&self.times, &self.phi, &self.phi_slopes, i, t);
        ProtocolSample {
            theta: theta.clamp(0.0, PI),
            phi,
            theta_dot,
            phi_dot,
        }
    }
}

/// Fritsch-Carlson node slopes: zero at local extrema, weighted harmonic
/// mean of neighbouring secants elsewhere, one-sided three-point ends.
fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// Cubic Hermite value and derivative on interval `i`.
fn hermite(x: &[f64], y: &[f64], d: &[f64], i: usize, t: f64) -> (f64, f64) {
    let h = x[i + 1] - x[i];
    let s = (t - x[i]) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let value = h00 * y[i] + h10 * h * d[i] + h01 * y[i + 1] + h11 * h * d[i + 1];
    let dh00 = (6.0 * s2 - 6.0 * s) / h;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = (-6.0 * s2 + 6.0 * s) / h;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let deriv = dh00 * y[i] + dh10 * d[i] + dh01 * y[i + 1] + dh11 * d[i + 1];
    (value, deriv)
}

/// Prescribed motion of the Coulomb centre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NucleusPath {
    Static(Vec3),
    /// Uniform circular loop of radius `radius` and period `period` in the
    /// plane through `center` normal to `axis`. Starts at `center + radius e1`.
    Circle {
        center: Vec3,
        radius: f64,
        period: f64,
        axis: Vec3,
    },
}

impl NucleusPath {
    pub fn circle(center: Vec3, radius: f64, period: f64, axis: Vec3) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("loop radius must be >= 0, got {radius}")));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Domain(format!("loop period must be > 0, got {period}")));
        }
        let axis = axis
            .normalized()
            .ok_or(Error::ZeroVector("nucleus loop axis"))?;
        Ok(Self::Circle {
            center,
            radius,
            period,
            axis,
        })
    }

    /// Warns when the loop is not slow compared with the orbital period.
    pub fn check_adiabatic(&self, orbital_period: f64) -> bool {
        match self {
            Self::Static(_) => true,
            Self::Circle { period, .. } => {
                let ratio = period / orbital_period;
                if ratio < ADIABATIC_LOOP_RATIO {
                    log::warn!(
                        "nucleus loop period is only {ratio:.1} orbital periods (< {ADIABATIC_LOOP_RATIO})"
                    );
                    false
                } else {
                    true
                }
            }
        }
    }

    pub fn position(&self, t: f64) -> Vec3 {
        match *self {
            Self::Static(r0) => r0,
            Self::Circle {
                center,
                radius,
                period,
                axis,
            } => {
                let (e1, e2) = plane_basis(axis);
                let (s, c) = (TAU * t / period).sin_cos();
                center + (e1 * c + e2 * s) * radius
            }
        }
    }

    pub fn velocity(&self, t: f64) -> Vec3 {
        match *self {
            Self::Static(_) => Vec3::ZERO,
            Self::Circle {
                radius,
                period,
                axis,
                ..
            } => {
                let (e1, e2) = plane_basis(axis);
                let w = TAU / period;
                let (s, c) = (w * t).sin_cos();
                (e2 * c - e1 * s) * (radius * w)
            }
        }
    }
}

/// Orthonormal pair spanning the plane normal to the unit vector `n`, with
/// `e1 x e2 = n`. For `n = z` this is `(x, y)`.
pub fn plane_basis(n: Vec3) -> (Vec3, Vec3) {
    let seed = if n.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
    let e1 = seed.reject_from(n).normalized().expect("seed not parallel to n");
    (e1, n.cross(e1))
}
