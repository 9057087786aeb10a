//! Preset experiments and parameter sweeps.
//!
//! * [`run_fig1`]: Kepler electron around a nucleus dragged slowly along a
//!   closed loop; the Runge-Lenz direction should come back unchanged.
//! * [`run_fig2`]: fixed anisotropy with a slightly out-of-plane start; the
//!   orbit should stay in the easy plane with a fixed apsis line.
//! * [`run_fig3_point`]: the anisotropy axis sweeps a cone once; the apsis
//!   line should turn by the swept solid angle.
//! * [`sweep_theta`]: the previous over a grid of cone angles, in parallel.

mod config;
mod output;

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use serde::Serialize;

pub use config::{Experiment, ExperimentConfig, InitialState, NucleusConfig, OutputConfig, Variant};
pub use output::{
    emit_series_svg, emit_svg, read_sweep_csv, render_series_svg, render_sweep_svg,
    sweep_csv_string, write_csv, write_trajectory_csv, Series, SweepRow, SWEEP_COLUMNS,
    TRAJECTORY_COLUMNS,
};

use crate::diagnostics::{dipole_rotation, orbit_elements, runge_lenz, OrbitElements};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::hamiltonians::{HamiltonianSpec, KeplerParams, PhaseState, DEFAULT_R_MIN_GUARD};
use crate::integrator::{
    default_dt, integrate_with, IntegratorConfig, Sampling, Scheme, Trajectory,
    DEFAULT_STEPS_PER_PERIOD,
};
use crate::protocols::{AnisotropyProtocol, NucleusPath};
use crate::theory;

/// Fewer steps per period than this is accepted but logged.
pub const MIN_STEPS_PER_ORBIT: f64 = 200.0;

/// Numerical settings shared by every preset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSettings {
    pub scheme: Scheme,
    /// Steps per `min(T_orb, 2 pi / omega0)`; ignored when `dt` is set.
    pub steps_per_orbit: f64,
    pub dt: Option<f64>,
    /// Quiet segments before and after the drive, in orbital periods. Also
    /// the averaging window for the apsis direction.
    pub settle_orbits: f64,
    pub r_min_guard: f64,
    /// Keep every n-th step in the returned trace; `None` keeps no trace.
    #[serde(skip)]
    pub trace: Option<Sampling>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            scheme: Scheme::Yoshida3,
            steps_per_orbit: DEFAULT_STEPS_PER_PERIOD,
            dt: None,
            settle_orbits: 10.0,
            r_min_guard: DEFAULT_R_MIN_GUARD,
            trace: None,
        }
    }
}

impl RunSettings {
    fn validate(&self) -> Result<()> {
        if !(self.steps_per_orbit > 0.0) {
            return Err(Error::InvalidConfig("steps_per_orbit must be > 0".into()));
        }
        if self.steps_per_orbit < MIN_STEPS_PER_ORBIT && self.dt.is_none() {
            log::warn!(
                "steps_per_orbit = {} is below the recommended {MIN_STEPS_PER_ORBIT}",
                self.steps_per_orbit
            );
        }
        if !(self.settle_orbits >= 0.0 && self.settle_orbits.is_finite()) {
            return Err(Error::InvalidConfig("settle_orbits must be >= 0".into()));
        }
        Ok(())
    }

    fn integrator(&self, orbital_period: f64, omega0: f64) -> Result<IntegratorConfig> {
        self.validate()?;
        let dt = self
            .dt
            .unwrap_or_else(|| default_dt(orbital_period, omega0, self.steps_per_orbit));
        let cfg = IntegratorConfig::new(self.scheme, dt)?.with_max_steps(u64::MAX);
        cfg.check_resolution(orbital_period, omega0);
        Ok(cfg)
    }
}

/// Summary of one simulated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub experiment: &'static str,
    pub theta: f64,
    pub omega0: f64,
    pub tau: f64,
    pub settings: RunSettings,
    pub dt: f64,
    pub initial: OrbitElements,
    pub final_elements: OrbitElements,
    /// Cosine between the settled initial and final Runge-Lenz directions.
    pub cos_phi_3d: f64,
    /// Same after projecting both onto the final easy plane.
    pub cos_phi_projected: f64,
    /// Theory value for the protocol's cone angle.
    pub cos_phi_pred: f64,
    /// Signed rotation of the apsis line about the final orbit normal.
    pub signed_rotation: f64,
    /// Largest out-of-plane excursion during the final settle window.
    pub z_residual: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub steps: u64,
    pub wall_time_s: f64,
    /// How far the driving protocol is from an exactly closed loop.
    pub loop_residual: f64,
}

impl RunRecord {
    pub fn abs_err_3d(&self) -> f64 {
        (self.cos_phi_3d - self.cos_phi_pred).abs()
    }

    /// Angle between the settled initial and final apsis directions.
    pub fn angle_change(&self) -> f64 {
        self.cos_phi_3d.clamp(-1.0, 1.0).acos()
    }
}

/// In-plane initial condition: position `(r0, 0, 0)` and momentum
/// `m v0 (0, cos theta, -sin theta)`, both orthogonal to the anisotropy axis
/// at `(theta, phi = 0)`.
pub fn make_inplane_state(r0: f64, v0: f64, theta: f64, m: f64) -> Result<PhaseState> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::Domain(format!("R0 must be > 0, got {r0}")));
    }
    if !(v0 > 0.0 && v0.is_finite()) {
        return Err(Error::Domain(format!("V0 must be > 0, got {v0}")));
    }
    crate::geometry::check_colatitude(theta)?;
    let (s, c) = theta.sin_cos();
    Ok(PhaseState::new(
        Vec3::new(r0, 0.0, 0.0),
        Vec3::new(0.0, c, -s) * (m * v0),
    ))
}

/// Running mean of a vector quantity.
#[derive(Default)]
struct VecMean {
    sum: Vec3,
    count: u64,
}

impl VecMean {
    fn push(&mut self, v: Vec3) {
        self.sum += v;
        self.count += 1;
    }

    fn mean(&self) -> Vec3 {
        self.sum / self.count.max(1) as f64
    }
}

fn trace_keep(trace: Option<Sampling>, step: u64, dt: f64, next: &mut (u64, u64)) -> bool {
    match trace {
        None => false,
        Some(Sampling::Endpoints) => step == 0,
        Some(Sampling::Stride(n)) => step.is_multiple_of(n.max(1)),
        Some(Sampling::Stroboscopic { period }) => {
            let mut hit = false;
            while step == next.1 {
                hit = true;
                next.0 += 1;
                next.1 = (next.0 as f64 * period / dt).round() as u64;
            }
            hit
        }
    }
}

fn finish_trace(
    trace: Option<Sampling>,
    times: Vec<f64>,
    states: Vec<PhaseState>,
    steps: u64,
    t_end: f64,
    last: PhaseState,
) -> Option<Trajectory> {
    trace.map(|sampling| {
        let mut t = Trajectory {
            times,
            states,
            sampling,
            steps,
        };
        if t.times.last() != Some(&t_end) {
            t.times.push(t_end);
            t.states.push(last);
        }
        t
    })
}

/// Parameters of the cone-sweep experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig3Params {
    pub theta: f64,
    pub omega0: f64,
    pub tau: f64,
    pub kepler: KeplerParams,
    pub r0: f64,
    pub v0: f64,
    pub settings: RunSettings,
}

impl Fig3Params {
    /// Strong-anisotropy defaults: `omega0 = 5`, `tau omega0 = 50`.
    pub fn new(theta: f64) -> Self {
        Self {
            theta,
            omega0: 5.0,
            tau: 10.0,
            kepler: KeplerParams::default(),
            r0: 1.0,
            v0: 0.75,
            settings: RunSettings::default(),
        }
    }

    pub fn with_anisotropy(mut self, omega0: f64, tau_omega0: f64) -> Self {
        self.omega0 = omega0;
        self.tau = tau_omega0 / omega0;
        self
    }
}

/// Outcome of a single cone-sweep run.
#[derive(Debug, Clone)]
pub struct Fig3Report {
    pub record: RunRecord,
    pub spec: HamiltonianSpec,
    pub trace: Option<Trajectory>,
}

/// Sweep the anisotropy axis once around a cone of half-angle `theta` with a
/// tanh ramp and compare the turn of the apsis line with the solid angle.
pub fn run_fig3_point(params: &Fig3Params) -> Result<Fig3Report> {
    let clock = Instant::now();
    let state0 = make_inplane_state(params.r0, params.v0, params.theta, params.kepler.m)?;
    let initial = orbit_elements(&state0, params.kepler)?;
    let protocol = AnisotropyProtocol::tanh_ramp(params.theta, params.tau)?;
    let loop_residual = protocol.closure_residual();
    let (w0, w1) = protocol.window();
    let spec = HamiltonianSpec::rotating_anisotropy(params.kepler, params.omega0, protocol)?
        .with_r_min_guard(params.settings.r_min_guard)?;
    let period = initial.period;
    let cfg = params.settings.integrator(period, params.omega0)?;
    let settle = params.settings.settle_orbits * period;
    let (t_start, t_end) = (w0 - settle, w1 + settle);
    let axis_final = spec.axis(t_end).expect("rotating system has an axis");

    let mut pre = VecMean::default();
    let mut post = VecMean::default();
    let mut z_residual = 0.0_f64;
    let mut guard_err = None;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut strobe = (0u64, 0u64);
    let (last, steps) = integrate_with(&spec, &state0, t_start, t_end, &cfg, |k, t, s| {
        if t <= w0 || t >= w1 {
            match runge_lenz(s, params.kepler) {
                Ok(a) if t <= w0 => pre.push(a),
                Ok(a) => post.push(a),
                Err(e) => guard_err = Some(e),
            }
        }
        if t >= w1 {
            z_residual = z_residual.max(s.r.dot(axis_final).abs());
        }
        if trace_keep(params.settings.trace, k, cfg.dt, &mut strobe) {
            times.push(t);
            states.push(*s);
        }
    })?;
    if let Some(e) = guard_err {
        return Err(e);
    }
    let final_elements = orbit_elements(&last, params.kepler)?;
    let (a_pre, a_post) = (pre.mean(), post.mean());
    let normal = final_elements.angular_momentum;
    let rotation = dipole_rotation(a_pre, a_post, normal)?;
    let projected = dipole_rotation(
        a_pre.reject_from(axis_final),
        a_post.reject_from(axis_final),
        axis_final,
    )?;
    let record = RunRecord {
        experiment: "fig3",
        theta: params.theta,
        omega0: params.omega0,
        tau: params.tau,
        settings: params.settings,
        dt: cfg.dt,
        initial,
        final_elements,
        cos_phi_3d: rotation.cos_phi,
        cos_phi_projected: projected.cos_phi,
        cos_phi_pred: theory::predicted_cos_phi(params.theta)?,
        signed_rotation: rotation.signed_phi_in_plane,
        z_residual,
        energy_initial: spec.total_energy(&state0, t_start)?,
        energy_final: spec.total_energy(&last, t_end)?,
        steps,
        wall_time_s: clock.elapsed().as_secs_f64(),
        loop_residual,
    };
    let trace = finish_trace(params.settings.trace, times, states, steps, t_end, last);
    Ok(Fig3Report {
        record,
        spec,
        trace,
    })
}

/// Uniform grid of `points` colatitudes on `[lo, hi]`.
pub fn theta_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::InvalidConfig("grid needs at least one point".into()));
    }
    crate::geometry::check_colatitude(lo)?;
    crate::geometry::check_colatitude(hi)?;
    if points == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (points - 1) as f64
            }
        })
        .collect())
}

/// Default grid of the cone sweep: 9 points on `[0.1, pi/2]`.
pub fn default_theta_grid() -> Vec<f64> {
    theta_grid(0.1, FRAC_PI_2, 9).expect("static grid is valid")
}

/// Run [`run_fig3_point`] for every colatitude in `grid` on `workers`
/// threads. Rows come back in grid order; a failing point yields a row with
/// its error code instead of aborting the sweep.
pub fn sweep_theta(grid: &[f64], base: &Fig3Params, workers: usize) -> Result<Vec<SweepRow>> {
    use rayon::prelude::*;
    if grid.is_empty() {
        return Err(Error::InvalidConfig("theta grid is empty".into()));
    }
    if workers == 0 {
        return Err(Error::InvalidConfig("workers must be >= 1".into()));
    }
    let run_point = |&theta: &f64| {
        let mut params = *base;
        params.theta = theta;
        params.settings.trace = None;
        match run_fig3_point(&params) {
            Ok(report) => SweepRow::from_record(&report.record),
            Err(e) => SweepRow::failed(theta, base.omega0, base.tau, &e),
        }
    };
    if workers == 1 {
        return Ok(grid.iter().map(run_point).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| grid.par_iter().map(run_point).collect()))
}

/// Parameters of the fixed-anisotropy stability run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig2Params {
    pub omega0: f64,
    pub kepler: KeplerParams,
    pub state0: PhaseState,
    pub orbits: f64,
    pub settings: RunSettings,
    /// Keep roughly this many points of the first and last orbit for plots.
    pub orbit_plot_points: usize,
}

impl Default for Fig2Params {
    fn default() -> Self {
        Self {
            omega0: 0.2,
            kepler: KeplerParams::default(),
            state0: PhaseState::new(Vec3::new(1.0, 0.0, 0.01), Vec3::new(0.0, 0.75, 0.0)),
            orbits: 3000.0,
            settings: RunSettings::default(),
            orbit_plot_points: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fig2Report {
    pub record: RunRecord,
    pub spec: HamiltonianSpec,
    /// `(n, state)` once per orbital period.
    pub strobe: Vec<(u64, PhaseState)>,
    /// Signed rotation of the apsis line about z between `n = 0` and the
    /// last stroboscopic sample.
    pub apsis_rotation: f64,
    pub z_mean: f64,
    /// Largest `|z|` in the first and last tenth of the stroboscopic series.
    pub envelope_first: f64,
    pub envelope_last: f64,
    /// Positions over the first and last orbit.
    pub first_orbit: Vec<Vec3>,
    pub last_orbit: Vec<Vec3>,
    pub trace: Option<Trajectory>,
}

impl Fig2Report {
    pub fn z_series(&self) -> Vec<(u64, f64)> {
        self.strobe.iter().map(|(n, s)| (*n, s.r.z)).collect()
    }
}

/// Long run at fixed anisotropy, sampled once per orbit.
pub fn run_fig2(params: &Fig2Params) -> Result<Fig2Report> {
    let clock = Instant::now();
    let spec = HamiltonianSpec::fixed_anisotropy(params.kepler, params.omega0)?
        .with_r_min_guard(params.settings.r_min_guard)?;
    let initial = orbit_elements(&params.state0, params.kepler)?;
    let period = initial.period;
    let cfg = params.settings.integrator(period, params.omega0)?;
    let t_end = params.orbits * period;
    let total_steps = crate::integrator::step_count(0.0, t_end, cfg.dt);
    let orbit_steps = (period / cfg.dt).round() as u64;
    let plot_stride = (orbit_steps / params.orbit_plot_points.max(1) as u64).max(1);

    let mut strobe = Vec::new();
    let mut next = (0u64, 0u64);
    let mut first_orbit = Vec::new();
    let mut last_orbit = Vec::new();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut trace_next = (0u64, 0u64);
    let (last, steps) = integrate_with(&spec, &params.state0, 0.0, t_end, &cfg, |k, t, s| {
        if trace_keep(
            Some(Sampling::Stroboscopic { period }),
            k,
            cfg.dt,
            &mut next,
        ) {
            strobe.push((next.0 - 1, *s));
        }
        if k % plot_stride == 0 {
            if k <= orbit_steps {
                first_orbit.push(s.r);
            }
            if k + orbit_steps >= total_steps {
                last_orbit.push(s.r);
            }
        }
        if trace_keep(params.settings.trace, k, cfg.dt, &mut trace_next) {
            times.push(t);
            states.push(*s);
        }
    })?;
    let final_elements = orbit_elements(&last, params.kepler)?;
    let (_, s_first) = strobe[0];
    let (_, s_last) = strobe[strobe.len() - 1];
    let a_first = runge_lenz(&s_first, params.kepler)?;
    let a_last = runge_lenz(&s_last, params.kepler)?;
    let in_plane = dipole_rotation(a_first, a_last, Vec3::Z)?;
    let rotation = dipole_rotation(a_first, a_last, final_elements.angular_momentum)?;
    let projected = dipole_rotation(
        a_first.reject_from(Vec3::Z),
        a_last.reject_from(Vec3::Z),
        Vec3::Z,
    )?;

    let zs: Vec<f64> = strobe.iter().map(|(_, s)| s.r.z).collect();
    let z_mean = zs.iter().sum::<f64>() / zs.len() as f64;
    let decile = (zs.len() / 10).max(1);
    let envelope = |xs: &[f64]| xs.iter().fold(0.0_f64, |m, z| m.max(z.abs()));
    let envelope_first = envelope(&zs[..decile]);
    let envelope_last = envelope(&zs[zs.len() - decile..]);

    let record = RunRecord {
        experiment: "fig2",
        theta: 0.0,
        omega0: params.omega0,
        tau: 0.0,
        settings: params.settings,
        dt: cfg.dt,
        initial,
        final_elements,
        cos_phi_3d: rotation.cos_phi,
        cos_phi_projected: projected.cos_phi,
        cos_phi_pred: theory::predicted_cos_phi(0.0)?,
        signed_rotation: in_plane.signed_phi_in_plane,
        z_residual: envelope_last,
        energy_initial: spec.total_energy(&params.state0, 0.0)?,
        energy_final: spec.total_energy(&last, t_end)?,
        steps,
        wall_time_s: clock.elapsed().as_secs_f64(),
        loop_residual: 0.0,
    };
    let trace = finish_trace(params.settings.trace, times, states, steps, t_end, last);
    Ok(Fig2Report {
        record,
        spec,
        apsis_rotation: in_plane.signed_phi_in_plane,
        strobe,
        z_mean,
        envelope_first,
        envelope_last,
        first_orbit,
        last_orbit,
        trace,
    })
}

/// Parameters of the moving-nucleus run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig1Params {
    pub kepler: KeplerParams,
    /// Initial position and momentum relative to the nucleus.
    pub relative_state0: PhaseState,
    pub rho: f64,
    /// Loop period in orbital periods.
    pub t_loop_orbits: f64,
    pub loop_axis: Vec3,
    pub settings: RunSettings,
}

impl Default for Fig1Params {
    fn default() -> Self {
        Self {
            kepler: KeplerParams::default(),
            relative_state0: PhaseState::new(Vec3::X, Vec3::new(0.0, 0.75, 0.0)),
            rho: 0.3,
            t_loop_orbits: 200.0,
            loop_axis: Vec3::new(0.0, 1.0, 1.0),
            settings: RunSettings::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fig1Report {
    pub record: RunRecord,
    pub spec: HamiltonianSpec,
    /// Angle between the settled Runge-Lenz directions (nucleus frame)
    /// before and after one loop.
    pub angle_change: f64,
    pub trace: Option<Trajectory>,
}

/// Drag the nucleus once around a closed circle and compare the Runge-Lenz
/// direction, measured in the nucleus frame, before and after.
///
/// The run spans `[-settle, T_loop + settle]`; the nucleus keeps circling
/// during the settle windows, so both averaging windows see the same part of
/// the loop.
pub fn run_fig1(params: &Fig1Params) -> Result<Fig1Report> {
    let clock = Instant::now();
    let initial = orbit_elements(&params.relative_state0, params.kepler)?;
    let period = initial.period;
    let t_loop = params.t_loop_orbits * period;
    let path = NucleusPath::circle(Vec3::ZERO, params.rho, t_loop, params.loop_axis)?;
    path.check_adiabatic(period);
    let spec = HamiltonianSpec::moving_nucleus(params.kepler, path)
        .with_r_min_guard(params.settings.r_min_guard)?;
    let cfg = params.settings.integrator(period, 0.0)?;
    let settle = params.settings.settle_orbits * period;
    let (t_start, t_end) = (-settle, t_loop + settle);
    let state0 = PhaseState::new(
        params.relative_state0.r + spec.nucleus(t_start),
        params.relative_state0.p + spec.nucleus_velocity(t_start) * params.kepler.m,
    );

    let mut pre = VecMean::default();
    let mut post = VecMean::default();
    let mut guard_err = None;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut strobe = (0u64, 0u64);
    let (last, steps) = integrate_with(&spec, &state0, t_start, t_end, &cfg, |k, t, s| {
        if t <= 0.0 || t >= t_loop {
            let rel = spec.relative_state(s, t);
            match runge_lenz(&rel, params.kepler) {
                Ok(a) if t <= 0.0 => pre.push(a),
                Ok(a) => post.push(a),
                Err(e) => guard_err = Some(e),
            }
        }
        if trace_keep(params.settings.trace, k, cfg.dt, &mut strobe) {
            times.push(t);
            states.push(*s);
        }
    })?;
    if let Some(e) = guard_err {
        return Err(e);
    }
    let rel_last = spec.relative_state(&last, t_end);
    let final_elements = orbit_elements(&rel_last, params.kepler)?;
    let rotation = dipole_rotation(pre.mean(), post.mean(), final_elements.angular_momentum)?;
    let record = RunRecord {
        experiment: "fig1",
        theta: 0.0,
        omega0: 0.0,
        tau: t_loop,
        settings: params.settings,
        dt: cfg.dt,
        initial,
        final_elements,
        cos_phi_3d: rotation.cos_phi,
        cos_phi_projected: rotation.cos_phi,
        cos_phi_pred: theory::predicted_cos_phi(0.0)?,
        signed_rotation: rotation.signed_phi_in_plane,
        z_residual: 0.0,
        energy_initial: spec.comoving_energy(&state0, t_start)?,
        energy_final: spec.comoving_energy(&last, t_end)?,
        steps,
        wall_time_s: clock.elapsed().as_secs_f64(),
        loop_residual: spec.nucleus(0.0).max_abs_diff(spec.nucleus(t_loop)),
    };
    let trace = finish_trace(params.settings.trace, times, states, steps, t_end, last);
    Ok(Fig1Report {
        angle_change: rotation.phi_unsigned,
        record,
        spec,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn inplane_state_examples() {
        let s = make_inplane_state(1.0, 0.75, 0.0, 1.0).unwrap();
        assert_eq!(s, PhaseState::new(Vec3::X, Vec3::new(0.0, 0.75, 0.0)));
        let s = make_inplane_state(1.0, 0.75, FRAC_PI_2, 1.0).unwrap();
        assert!(s.p.max_abs_diff(Vec3::new(0.0, 0.0, -0.75)) < 1e-16);
        assert!(make_inplane_state(0.0, 0.75, 0.1, 1.0).is_err());
        assert!(make_inplane_state(1.0, -0.75, 0.1, 1.0).is_err());
        assert!(make_inplane_state(1.0, 0.75, 3.5, 1.0).is_err());
    }

    #[test]
    fn inplane_state_is_orthogonal_to_axis() {
        for i in 0..=20 {
            let theta = PI * i as f64 / 20.0;
            let s = make_inplane_state(1.3, 0.6, theta, 2.0).unwrap();
            let axis = crate::geometry::anisotropy_axis(crate::geometry::FrameAngles::new(theta, 0.0));
            assert!(s.p.dot(axis).abs() <= 1e-14);
            assert!(s.r.dot(axis).abs() <= 1e-14);
        }
    }

    #[test]
    fn grid_endpoints_exact() {
        let g = default_theta_grid();
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[8], FRAC_PI_2);
        assert!(theta_grid(0.1, 1.0, 0).is_err());
        assert_eq!(theta_grid(0.4, 1.0, 1).unwrap(), vec![0.4]);
    }

    #[test]
    fn sweep_rejects_empty_inputs() {
        let base = Fig3Params::new(0.5);
        assert!(sweep_theta(&[], &base, 1).is_err());
        assert!(sweep_theta(&[0.5], &base, 0).is_err());
    }

    #[test]
    fn failing_point_is_recorded_in_row() {
        let mut base = Fig3Params::new(0.5);
        base.settings.r_min_guard = 2.0;
        let rows = sweep_theta(&[0.5, 0.6], &base, 2).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert_eq!(row.error_code, "MinRadiusViolation");
            assert!(row.cos_phi_3d.is_nan());
            assert_eq!(row.cos_phi_pred, theory::predicted_cos_phi(row.theta).unwrap());
        }
    }
}
