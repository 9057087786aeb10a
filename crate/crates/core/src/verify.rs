//! Self-checks of the numerical machinery, runnable from the command line.
//!
//! Each suite returns a list of [`CheckResult`]s comparing a measured value
//! with a threshold. Randomised checks draw from a seeded ChaCha generator so
//! a given seed always produces the same table.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{orbit_elements, runge_lenz};
use crate::error::{Error, Result};
use crate::geometry::{
    coriolis_correction, coriolis_correction_expanded, rotation_matrix, rotation_matrix_dphi,
    FrameAngles, RotationMatrix, Vec3,
};
use crate::hamiltonians::{HamiltonianSpec, KeplerParams, PhaseState};
use crate::integrator::{integrate_with, measure_order, step, IntegratorConfig, Scheme};

pub const DEFAULT_SEED: u64 = 20_240_917;

/// Steps per orbit used for the order measurements.
pub const VERLET_ORDER_STEPS: [f64; 4] = [250.0, 500.0, 1000.0, 2000.0];
pub const YOSHIDA_ORDER_STEPS: [f64; 4] = [100.0, 200.0, 400.0, 800.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Conservation,
    Order,
    Coriolis,
    Reversibility,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conservation" => Ok(Suite::Conservation),
            "order" => Ok(Suite::Order),
            "coriolis" => Ok(Suite::Coriolis),
            "reversibility" => Ok(Suite::Reversibility),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidConfig(format!("unknown suite `{other}`"))),
        }
    }
}

/// How a measured value is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Within { target: f64, tol: f64 },
}

impl Bound {
    pub fn holds(self, v: f64) -> bool {
        match self {
            Bound::AtMost(t) => v <= t,
            Bound::AtLeast(t) => v >= t,
            Bound::Within { target, tol } => (v - target).abs() <= tol,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::AtMost(t) => write!(f, "<= {t:e}"),
            Bound::AtLeast(t) => write!(f, ">= {t}"),
            Bound::Within { target, tol } => write!(f, "{target} +/- {tol}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub bound: Bound,
}

impl CheckResult {
    fn new(suite: &'static str, name: impl Into<String>, value: f64, bound: Bound) -> Self {
        Self {
            suite,
            name: name.into(),
            value,
            bound,
        }
    }

    pub fn passed(&self) -> bool {
        self.bound.holds(self.value)
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<14} {:<44} {:>12.4e}  (need {})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.value,
            self.bound
        )
    }
}

/// Fig-2 starting point: apoapsis of an `e = 7/16` orbit.
pub fn reference_state() -> PhaseState {
    PhaseState::new(Vec3::X, Vec3::new(0.0, 0.75, 0.0))
}

fn reference_period() -> f64 {
    orbit_elements(&reference_state(), KeplerParams::default())
        .expect("reference orbit is bound")
        .period
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Largest relative drifts of the invariants along a run, measured against
/// their initial values at every step.
#[derive(Default)]
struct Drift {
    energy: f64,
    l: f64,
    a: f64,
    a_norm: f64,
    lz: f64,
}

fn drift_run(spec: &HamiltonianSpec, state0: &PhaseState, orbits: f64, per_orbit: f64) -> Result<Drift> {
    let period = reference_period();
    let cfg = IntegratorConfig::new(Scheme::Yoshida3, period / per_orbit)?.with_max_steps(u64::MAX);
    let kepler = spec.kepler;
    let e0 = spec.total_energy(state0, 0.0)?;
    let l0 = state0.angular_momentum();
    let a0 = runge_lenz(state0, kepler)?;
    let mut d = Drift::default();
    let mut err = None;
    integrate_with(spec, state0, 0.0, orbits * period, &cfg, |_, t, s| {
        match spec.total_energy(s, t) {
            Ok(e) => d.energy = d.energy.max(rel(e, e0)),
            Err(e) => err = Some(e),
        }
        let l = s.angular_momentum();
        d.l = d.l.max((l - l0).norm() / l0.norm());
        d.lz = d.lz.max(rel(l.z, l0.z));
        if let Ok(a) = runge_lenz(s, kepler) {
            d.a = d.a.max((a - a0).norm() / a0.norm());
            d.a_norm = d.a_norm.max(rel(a.norm(), a0.norm()));
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(d),
    }
}

/// Conservation checks at the reference step `T_orb / 1000`.
pub fn conservation() -> Result<Vec<CheckResult>> {
    conservation_with(1000.0)
}

/// Conservation checks over 100 orbits with `steps_per_orbit` steps each.
pub fn conservation_with(steps_per_orbit: f64) -> Result<Vec<CheckResult>> {
    const S: &str = "conservation";
    let kepler = HamiltonianSpec::kepler(KeplerParams::default());
    let d = drift_run(&kepler, &reference_state(), 100.0, steps_per_orbit)?;
    let aniso = HamiltonianSpec::fixed_anisotropy(KeplerParams::default(), 0.2)?;
    let tilted = PhaseState::new(Vec3::new(1.0, 0.0, 0.01), Vec3::new(0.0, 0.75, 0.0));
    let da = drift_run(&aniso, &tilted, 100.0, steps_per_orbit)?;
    Ok(vec![
        CheckResult::new(S, "kepler |dE/E|, 100 orbits", d.energy, Bound::AtMost(1e-7)),
        CheckResult::new(S, "kepler |dL|/|L|, 100 orbits", d.l, Bound::AtMost(1e-8)),
        CheckResult::new(S, "kepler |d|A||/|A|, 100 orbits", d.a_norm, Bound::AtMost(1e-7)),
        CheckResult::new(S, "kepler |dA|/|A| (vector), 100 orbits", d.a, Bound::AtMost(1e-7)),
        CheckResult::new(S, "anisotropic |dLz/Lz|, 100 orbits", da.lz, Bound::AtMost(1e-7)),
    ])
}

pub fn order() -> Result<Vec<CheckResult>> {
    const S: &str = "order";
    let spec = HamiltonianSpec::kepler(KeplerParams::default());
    let period = reference_period();
    let mut out = Vec::new();
    for (scheme, steps, bound) in [
        (Scheme::Verlet2, VERLET_ORDER_STEPS, Bound::Within { target: 2.0, tol: 0.2 }),
        (Scheme::Yoshida3, YOSHIDA_ORDER_STEPS, Bound::AtLeast(3.0)),
    ] {
        let h: Vec<f64> = steps.iter().map(|n| period / n).collect();
        let est = measure_order(&spec, &reference_state(), period, scheme, &h)?;
        out.push(CheckResult::new(
            S,
            format!("{scheme} measured global order"),
            est.order.unwrap_or(f64::INFINITY),
            bound,
        ));
    }
    Ok(out)
}

fn random_angles(rng: &mut ChaCha8Rng) -> FrameAngles {
    FrameAngles::new(rng.random_range(0.0..PI), rng.random_range(-2.0 * TAU..2.0 * TAU))
}

fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
    Vec3::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

pub fn coriolis(seed: u64) -> Result<Vec<CheckResult>> {
    const S: &str = "coriolis";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut dual, mut antisym, mut ortho, mut det) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let angles = random_angles(&mut rng);
        let p = random_vec(&mut rng, 2.0);
        let r = random_vec(&mut rng, 2.0);
        let phi_dot = rng.random_range(-3.0..3.0);
        let m = coriolis_correction(p, r, angles, phi_dot);
        let t = coriolis_correction_expanded(p, r, angles, phi_dot);
        dual = dual.max((m.abs() - t.abs()).abs());

        let rot = rotation_matrix(angles);
        let g = rot.transpose().matmul(&rotation_matrix_dphi(angles));
        antisym = antisym.max(g.max_abs_diff(&neg_transpose(&g)));
        ortho = ortho.max(rot.transpose().matmul(&rot).max_abs_diff(&RotationMatrix::IDENTITY));
        det = det.max((rot.determinant() - 1.0).abs());
    }
    Ok(vec![
        CheckResult::new(S, "max ||matrix dH| - |expanded dH||", dual, Bound::AtMost(1e-12)),
        CheckResult::new(S, "max |G + G^T|, G = R^T dR/dphi", antisym, Bound::AtMost(1e-12)),
        CheckResult::new(S, "max |R^T R - I|", ortho, Bound::AtMost(1e-12)),
        CheckResult::new(S, "max |det R - 1|", det, Bound::AtMost(1e-12)),
    ])
}

fn neg_transpose(m: &RotationMatrix) -> RotationMatrix {
    let t = m.transpose().rows();
    RotationMatrix(t.map(|row| row.map(|v| -v)))
}

/// Forward `n` steps, flip momentum, `n` more steps, flip back.
pub fn round_trip(spec: &HamiltonianSpec, state0: &PhaseState, scheme: Scheme, h: f64, n: u64) -> Result<f64> {
    let mut s = *state0;
    for k in 0..n {
        s = step(spec, scheme, &s, k as f64 * h, h)?;
    }
    s = s.flipped();
    for k in 0..n {
        s = step(spec, scheme, &s, k as f64 * h, h)?;
    }
    Ok(s.flipped().max_abs_diff(state0))
}

pub fn reversibility() -> Result<Vec<CheckResult>> {
    const S: &str = "reversibility";
    let period = reference_period();
    let h = period / 1000.0;
    let kepler = HamiltonianSpec::kepler(KeplerParams::default());
    let aniso = HamiltonianSpec::fixed_anisotropy(KeplerParams::default(), 0.2)?;
    let tilted = PhaseState::new(Vec3::new(1.0, 0.0, 0.01), Vec3::new(0.0, 0.75, 0.0));
    let mut out = Vec::new();
    for scheme in [Scheme::Verlet2, Scheme::Yoshida3] {
        let err = round_trip(&kepler, &reference_state(), scheme, h, 10_000)?;
        out.push(CheckResult::new(S, format!("kepler {scheme}, 1e4 steps"), err, Bound::AtMost(1e-9)));
        let err = round_trip(&aniso, &tilted, scheme, h, 10_000)?;
        out.push(CheckResult::new(S, format!("anisotropic {scheme}, 1e4 steps"), err, Bound::AtMost(1e-9)));
    }
    Ok(out)
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<CheckResult>> {
    Ok(match suite {
        Suite::Conservation => conservation()?,
        Suite::Order => order()?,
        Suite::Coriolis => coriolis(seed)?,
        Suite::Reversibility => reversibility()?,
        Suite::All => {
            let mut all = conservation()?;
            all.extend(order()?);
            all.extend(coriolis(seed)?);
            all.extend(reversibility()?);
            all
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for (s, v) in [
            ("conservation", Suite::Conservation),
            ("order", Suite::Order),
            ("coriolis", Suite::Coriolis),
            ("reversibility", Suite::Reversibility),
            ("all", Suite::All),
        ] {
            assert_eq!(s.parse::<Suite>().unwrap(), v);
        }
        assert!("fast".parse::<Suite>().is_err());
    }

    #[test]
    fn bounds() {
        assert!(Bound::AtMost(1.0).holds(1.0));
        assert!(!Bound::AtLeast(3.0).holds(2.9));
        assert!(Bound::Within { target: 2.0, tol: 0.2 }.holds(1.85));
        assert!(!Bound::AtMost(1.0).holds(f64::NAN));
    }

    #[test]
    fn coriolis_suite_is_seed_deterministic() {
        let a = coriolis(7).unwrap();
        let b = coriolis(7).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(CheckResult::passed));
    }
}
