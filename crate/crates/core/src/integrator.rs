//! Fixed-step symplectic time stepping.
//!
//! Velocity Verlet is the base scheme; the triple-jump composition
//! `S(a1 h) S(a2 h) S(a1 h)` lifts it to higher order. For explicitly
//! time-dependent potentials each half-kick uses the force at its own
//! endpoint time, which reduces to textbook Verlet for static potentials.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::hamiltonians::{HamiltonianSpec, PhaseState};

/// Outer weight of the triple-jump composition, `1 / (2 - 2^(1/3))`.
pub fn yoshida_a1() -> f64 {
    1.0 / (2.0 - 2f64.cbrt())
}

/// Inner (negative) weight, `-2^(1/3) / (2 - 2^(1/3))`.
pub fn yoshida_a2() -> f64 {
    -2f64.cbrt() / (2.0 - 2f64.cbrt())
}

/// Steps per characteristic period used when no step size is given.
pub const DEFAULT_STEPS_PER_PERIOD: f64 = 2000.0;

/// Below this many steps per period a resolution warning is logged.
pub const MIN_RECOMMENDED_STEPS: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Second-order velocity Verlet.
    #[serde(alias = "verlet")]
    Verlet2,
    /// Triple-jump composition of three Verlet sub-steps.
    #[serde(alias = "yoshida")]
    Yoshida3,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Verlet2 => "verlet2",
            Scheme::Yoshida3 => "yoshida3",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "verlet2" | "verlet" => Ok(Scheme::Verlet2),
            "yoshida3" | "yoshida" => Ok(Scheme::Yoshida3),
            other => Err(Error::InvalidConfig(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub max_steps: u64,
}

impl IntegratorConfig {
    pub fn new(scheme: Scheme, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("dt must be > 0, got {dt}")));
        }
        Ok(Self {
            scheme,
            dt,
            max_steps: 100_000_000,
        })
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    /// Logs a warning when `dt` under-resolves the orbit or the out-of-plane
    /// oscillation. Returns `false` in that case.
    pub fn check_resolution(&self, orbital_period: f64, omega0: f64) -> bool {
        let mut ok = true;
        if self.dt > orbital_period / MIN_RECOMMENDED_STEPS {
            log::warn!(
                "dt = {} exceeds T_orb/{MIN_RECOMMENDED_STEPS} = {}",
                self.dt,
                orbital_period / MIN_RECOMMENDED_STEPS
            );
            ok = false;
        }
        if omega0 > 0.0 {
            let period = std::f64::consts::TAU / omega0;
            if self.dt > period / MIN_RECOMMENDED_STEPS {
                log::warn!(
                    "dt = {} exceeds (2 pi / omega0)/{MIN_RECOMMENDED_STEPS} = {}",
                    self.dt,
                    period / MIN_RECOMMENDED_STEPS
                );
                ok = false;
            }
        }
        ok
    }
}

/// `min(T_orb, 2 pi / omega0) / steps_per_period`.
pub fn default_dt(orbital_period: f64, omega0: f64, steps_per_period: f64) -> f64 {
    let mut period = orbital_period;
    if omega0 > 0.0 {
        period = period.min(std::f64::consts::TAU / omega0);
    }
    period / steps_per_period
}

/// Which states an integration keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    /// Initial and final state only.
    Endpoints,
    /// Every `n`-th step plus the final state.
    Stride(u64),
    /// The step nearest each multiple of `period` after `t0`, plus the final
    /// state. No interpolation.
    Stroboscopic { period: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub sampling: Sampling,
    /// Number of steps taken.
    pub steps: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first(&self) -> (f64, PhaseState) {
        (self.times[0], self.states[0])
    }

    pub fn last(&self) -> (f64, PhaseState) {
        let i = self.times.len() - 1;
        (self.times[i], self.states[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &PhaseState)> {
        self.times.iter().copied().zip(self.states.iter())
    }
}

/// One Verlet sub-step of length `t_end - t`, given the force at the start.
/// Returns the new state and the force at `t_end`.
fn verlet_substep(
    spec: &HamiltonianSpec,
    state: &PhaseState,
    force_start: Vec3,
    t: f64,
    t_end: f64,
) -> Result<(PhaseState, Vec3)> {
    let h = t_end - t;
    let half = 0.5 * h;
    let p_half = state.p + force_start * half;
    let r = state.r + p_half * (h / spec.kepler.m);
    let force_end = spec.force(r, t_end)?;
    Ok((PhaseState::new(r, p_half + force_end * half), force_end))
}

fn advance(
    spec: &HamiltonianSpec,
    scheme: Scheme,
    state: &PhaseState,
    force_start: Vec3,
    t: f64,
    t_end: f64,
) -> Result<(PhaseState, Vec3)> {
    match scheme {
        Scheme::Verlet2 => verlet_substep(spec, state, force_start, t, t_end),
        Scheme::Yoshida3 => {
            let h = t_end - t;
            let t1 = t + yoshida_a1() * h;
            let t2 = t + (yoshida_a1() + yoshida_a2()) * h;
            let (s, f) = verlet_substep(spec, state, force_start, t, t1)?;
            let (s, f) = verlet_substep(spec, &s, f, t1, t2)?;
            verlet_substep(spec, &s, f, t2, t_end)
        }
    }
}

/// Kick `h/2` at `t`, drift `h`, kick `h/2` at `t + h`.
pub fn verlet_step(
    spec: &HamiltonianSpec,
    state: &PhaseState,
    t: f64,
    h: f64,
) -> Result<PhaseState> {
    let f = spec.force(state.r, t)?;
    verlet_substep(spec, state, f, t, t + h).map(|(s, _)| s)
}

/// Three Verlet sub-steps of lengths `a1 h`, `a2 h`, `a1 h`.
pub fn yoshida3_step(
    spec: &HamiltonianSpec,
    state: &PhaseState,
    t: f64,
    h: f64,
) -> Result<PhaseState> {
    let f = spec.force(state.r, t)?;
    advance(spec, Scheme::Yoshida3, state, f, t, t + h).map(|(s, _)| s)
}

pub fn step(
    spec: &HamiltonianSpec,
    scheme: Scheme,
    state: &PhaseState,
    t: f64,
    h: f64,
) -> Result<PhaseState> {
    match scheme {
        Scheme::Verlet2 => verlet_step(spec, state, t, h),
        Scheme::Yoshida3 => yoshida3_step(spec, state, t, h),
    }
}

/// Number of steps needed to go from `t0` to `t1` with step `dt`; the last
/// step may be shorter.
pub fn step_count(t0: f64, t1: f64, dt: f64) -> u64 {
    let exact = (t1 - t0).abs() / dt;
    let n = exact.round();
    if (exact - n).abs() <= 1e-9 * n.max(1.0) {
        n as u64
    } else {
        exact.ceil() as u64
    }
}

/// Fixed-step march from `t0` to `t1`, calling `observe(step, t, state)` for
/// the initial state and after every step. Step `k` ends at `t0 + k dt`
/// except the last, which lands exactly on `t1`. Returns the final state and
/// the number of steps.
pub fn integrate_with<F>(
    spec: &HamiltonianSpec,
    state0: &PhaseState,
    t0: f64,
    t1: f64,
    config: &IntegratorConfig,
    mut observe: F,
) -> Result<(PhaseState, u64)>
where
    F: FnMut(u64, f64, &PhaseState),
{
    observe(0, t0, state0);
    if t1 == t0 {
        return Ok((*state0, 0));
    }
    let n = step_count(t0, t1, config.dt);
    if n > config.max_steps {
        return Err(Error::StepBudgetExceeded {
            required: n,
            budget: config.max_steps,
        });
    }
    let dt = config.dt.copysign(t1 - t0);
    let mut state = *state0;
    let mut force = spec.force(state.r, t0)?;
    let mut t = t0;
    for k in 1..=n {
        let t_next = if k == n { t1 } else { t0 + k as f64 * dt };
        let (s, f) = advance(spec, config.scheme, &state, force, t, t_next)?;
        state = s;
        force = f;
        t = t_next;
        observe(k, t, &state);
    }
    Ok((state, n))
}

/// [`integrate_with`] collecting a sampled [`Trajectory`].
pub fn integrate(
    spec: &HamiltonianSpec,
    state0: &PhaseState,
    t0: f64,
    t1: f64,
    config: &IntegratorConfig,
    sampling: Sampling,
) -> Result<Trajectory> {
    let n = if t1 == t0 { 0 } else { step_count(t0, t1, config.dt) };
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut next_strobe = 0u64;
    let mut strobe_index = 0u64;
    let (_, steps) = integrate_with(spec, state0, t0, t1, config, |k, t, s| {
        let keep = match sampling {
            Sampling::Endpoints => k == 0,
            Sampling::Stride(every) => k % every.max(1) == 0,
            Sampling::Stroboscopic { period } => {
                let mut hit = false;
                while k == next_strobe {
                    hit = true;
                    strobe_index += 1;
                    next_strobe = (strobe_index as f64 * period / config.dt).round() as u64;
                }
                hit
            }
        };
        if keep || k == n {
            times.push(t);
            states.push(*s);
        }
    })?;
    Ok(Trajectory {
        times,
        states,
        sampling,
        steps,
    })
}

/// Result of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    pub scheme: Scheme,
    /// `(h, global position error)` for every step size.
    pub errors: Vec<(f64, f64)>,
    /// Least-squares slope of `log error` against `log h`; `None` when the
    /// scheme is exact for this problem.
    pub order: Option<f64>,
    /// All errors at round-off level.
    pub exact: bool,
}

/// Errors below this (relative to the state scale) count as exact.
const EXACT_ERROR_LEVEL: f64 = 1e-11;

/// Estimate the global order of `scheme` over `[0, span]` from step sizes
/// `h_list`, each half the previous. The reference is a run with the same
/// scheme at the smallest step divided by 100.
pub fn measure_order(
    spec: &HamiltonianSpec,
    state0: &PhaseState,
    span: f64,
    scheme: Scheme,
    h_list: &[f64],
) -> Result<OrderEstimate> {
    if h_list.len() < 3 {
        return Err(Error::Domain("order measurement needs at least 3 step sizes".into()));
    }
    for w in h_list.windows(2) {
        if ((w[1] / w[0]) - 0.5).abs() > 1e-9 {
            return Err(Error::Domain("each step size must halve the previous".into()));
        }
    }
    let h_min = h_list[h_list.len() - 1];
    let run = |h: f64| -> Result<PhaseState> {
        let cfg = IntegratorConfig::new(scheme, h)?.with_max_steps(u64::MAX);
        integrate_with(spec, state0, 0.0, span, &cfg, |_, _, _| {}).map(|(s, _)| s)
    };
    let reference = run(h_min / 100.0)?;
    let scale = state0.r.norm().max(1.0);
    let mut errors = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let end = run(h)?;
        errors.push((h, (end.r - reference.r).norm()));
    }
    let exact = errors.iter().all(|&(_, e)| e <= EXACT_ERROR_LEVEL * scale);
    let order = if exact {
        None
    } else {
        let pts: Vec<(f64, f64)> = errors.iter().map(|&(h, e)| (h.ln(), e.ln())).collect();
        Some(least_squares_slope(&pts))
    };
    Ok(OrderEstimate {
        scheme,
        errors,
        order,
        exact,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::KeplerParams;

    const UNIT: KeplerParams = KeplerParams { m: 1.0, q: 1.0 };

    fn fig2_ic() -> PhaseState {
        PhaseState::new(Vec3::X, Vec3::new(0.0, 0.75, 0.0))
    }

    fn fig2_period() -> f64 {
        let a: f64 = 16.0 / 23.0;
        std::f64::consts::TAU * a.powf(1.5)
    }

    #[test]
    fn yoshida_coefficients() {
        let (a1, a2) = (yoshida_a1(), yoshida_a2());
        assert!((2.0 * a1 + a2 - 1.0).abs() < 1e-15);
        assert!((a1 - 1.3512071919).abs() < 1e-10);
        assert!((a2 + 1.7024143839).abs() < 1e-10);
    }

    #[test]
    fn free_particle_drifts_exactly() {
        let free = HamiltonianSpec::kepler(KeplerParams::new(2.0, 0.0).unwrap());
        let s = PhaseState::new(Vec3::new(1.0, -1.0, 0.5), Vec3::new(0.5, 0.25, -1.0));
        let out = verlet_step(&free, &s, 0.0, 0.5).unwrap();
        assert_eq!(out.p, s.p);
        assert_eq!(out.r, s.r + s.p / 2.0 * 0.5);
    }

    #[test]
    fn yoshida_step_is_time_symmetric() {
        let spec = HamiltonianSpec::fixed_anisotropy(UNIT, 0.4).unwrap();
        let s0 = PhaseState::new(Vec3::new(1.0, 0.0, 0.1), Vec3::new(0.0, 0.75, 0.05));
        let h = 0.01;
        let fwd = yoshida3_step(&spec, &s0, 0.0, h).unwrap();
        let back = yoshida3_step(&spec, &fwd, h, -h).unwrap();
        assert!(back.max_abs_diff(&s0) < 1e-12);
    }

    #[test]
    fn harmonic_energy_stays_bounded() {
        let w = 0.2;
        let spec = HamiltonianSpec::fixed_anisotropy(KeplerParams::new(1.0, 0.0).unwrap(), w)
            .unwrap();
        let s0 = PhaseState::new(Vec3::new(0.0, 0.0, 1.0), Vec3::ZERO);
        let h = 0.01 * std::f64::consts::TAU / w;
        let e0 = spec.total_energy(&s0, 0.0).unwrap();
        let mut s = s0;
        let mut worst = 0.0_f64;
        for k in 0..1_000_000u64 {
            s = verlet_step(&spec, &s, k as f64 * h, h).unwrap();
            if k % 1000 == 0 {
                worst = worst.max((spec.total_energy(&s, 0.0).unwrap() - e0).abs() / e0);
            }
        }
        // Verlet conserves p^2 / (2 (1 - (w h)^2 / 4)) + w^2 z^2 / 2 exactly.
        let bound = (w * h).powi(2) / 4.0 * 1.01;
        assert!(worst <= bound, "{worst} > {bound}");
    }

    fn one_orbit_error(scheme: Scheme, n: u64, reference: &PhaseState) -> f64 {
        let spec = HamiltonianSpec::kepler(UNIT);
        let t = fig2_period();
        let cfg = IntegratorConfig::new(scheme, t / n as f64).unwrap();
        let (s, steps) = integrate_with(&spec, &fig2_ic(), 0.0, t, &cfg, |_, _, _| {}).unwrap();
        assert_eq!(steps, n);
        (s.r - reference.r).norm()
    }

    fn reference(scheme: Scheme, n: u64) -> PhaseState {
        let spec = HamiltonianSpec::kepler(UNIT);
        let t = fig2_period();
        let cfg = IntegratorConfig::new(scheme, t / n as f64).unwrap();
        integrate_with(&spec, &fig2_ic(), 0.0, t, &cfg, |_, _, _| {}).unwrap().0
    }

    #[test]
    fn verlet_error_quarters_when_step_halves() {
        let r = reference(Scheme::Verlet2, 400_000);
        let coarse = one_orbit_error(Scheme::Verlet2, 2000, &r);
        let fine = one_orbit_error(Scheme::Verlet2, 4000, &r);
        let ratio = coarse / fine;
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn yoshida_error_drops_at_least_eightfold() {
        let r = reference(Scheme::Yoshida3, 100_000);
        let coarse = one_orbit_error(Scheme::Yoshida3, 250, &r);
        let fine = one_orbit_error(Scheme::Yoshida3, 500, &r);
        assert!(coarse / fine >= 8.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn zero_span_returns_initial_state() {
        let spec = HamiltonianSpec::kepler(UNIT);
        let cfg = IntegratorConfig::new(Scheme::Yoshida3, 0.01).unwrap();
        let traj = integrate(&spec, &fig2_ic(), 2.0, 2.0, &cfg, Sampling::Stride(1)).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.states[0], fig2_ic());
        assert_eq!(traj.steps, 0);
    }

    #[test]
    fn final_partial_step_lands_on_t1() {
        let spec = HamiltonianSpec::kepler(UNIT);
        let cfg = IntegratorConfig::new(Scheme::Verlet2, 0.3).unwrap();
        let traj = integrate(&spec, &fig2_ic(), 0.0, 1.0, &cfg, Sampling::Stride(1)).unwrap();
        assert_eq!(traj.steps, 4);
        assert_eq!(traj.times, vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn step_budget_enforced() {
        let spec = HamiltonianSpec::kepler(UNIT);
        let cfg = IntegratorConfig::new(Scheme::Verlet2, 0.01).unwrap().with_max_steps(10);
        let err = integrate(&spec, &fig2_ic(), 0.0, 1.0, &cfg, Sampling::Endpoints).unwrap_err();
        assert!(matches!(err, Error::StepBudgetExceeded { required: 100, budget: 10 }));
    }

    #[test]
    fn guard_violation_propagates() {
        let spec = HamiltonianSpec::kepler(UNIT);
        // Radial plunge straight into the nucleus.
        let s0 = PhaseState::new(Vec3::X, Vec3::new(-0.1, 0.0, 0.0));
        let spec = spec.with_r_min_guard(0.2).unwrap();
        let cfg = IntegratorConfig::new(Scheme::Verlet2, 0.01).unwrap();
        let err = integrate(&spec, &s0, 0.0, 10.0, &cfg, Sampling::Endpoints).unwrap_err();
        assert!(matches!(err, Error::MinRadiusViolation { .. }));
    }

    #[test]
    fn stroboscopic_sampling_picks_nearest_steps() {
        let spec = HamiltonianSpec::kepler(UNIT);
        let t = fig2_period();
        let cfg = IntegratorConfig::new(Scheme::Yoshida3, t / 777.3).unwrap();
        let traj = integrate(
            &spec,
            &fig2_ic(),
            0.0,
            3.0 * t,
            &cfg,
            Sampling::Stroboscopic { period: t },
        )
        .unwrap();
        // n = 0, 1, 2 plus the final state (which is also n = 3 up to dt).
        assert_eq!(traj.len(), 4);
        for (n, &ti) in traj.times.iter().take(3).enumerate() {
            assert!((ti - n as f64 * t).abs() <= 0.5 * cfg.dt + 1e-12);
        }
    }

    #[test]
    fn deterministic_runs_are_bitwise_equal() {
        let spec = HamiltonianSpec::fixed_anisotropy(UNIT, 0.2).unwrap();
        let cfg = IntegratorConfig::new(Scheme::Yoshida3, 1e-3).unwrap();
        let a = integrate(&spec, &fig2_ic(), 0.0, 5.0, &cfg, Sampling::Stride(7)).unwrap();
        let b = integrate(&spec, &fig2_ic(), 0.0, 5.0, &cfg, Sampling::Stride(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn free_particle_order_flagged_exact() {
        let free = HamiltonianSpec::kepler(KeplerParams::new(1.0, 0.0).unwrap());
        let s0 = PhaseState::new(Vec3::X, Vec3::new(0.2, 0.3, -0.1));
        let est = measure_order(&free, &s0, 1.0, Scheme::Yoshida3, &[0.1, 0.05, 0.025]).unwrap();
        assert!(est.exact);
        assert!(est.order.is_none());
    }

    #[test]
    fn order_needs_halving_sequence() {
        let spec = HamiltonianSpec::kepler(UNIT);
        assert!(measure_order(&spec, &fig2_ic(), 1.0, Scheme::Verlet2, &[0.1, 0.05]).is_err());
        assert!(
            measure_order(&spec, &fig2_ic(), 1.0, Scheme::Verlet2, &[0.1, 0.04, 0.02]).is_err()
        );
    }
}
