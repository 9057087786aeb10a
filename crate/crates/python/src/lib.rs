//! Python bindings. Vectors cross the boundary as 3-element lists or tuples.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hannay_core::diagnostics;
use hannay_core::geometry::{self, FrameAngles, Vec3};
use hannay_core::hamiltonians::{HamiltonianSpec, KeplerParams, PhaseState};
use hannay_core::harness::{self, Fig1Params, Fig2Params, Fig3Params, RunRecord, SweepRow};
use hannay_core::integrator::{self, IntegratorConfig, Sampling, Scheme};
use hannay_core::protocols::{AnisotropyProtocol, NucleusPath};
use hannay_core::theory::{self, LoopOnSphere};
use hannay_core::verify;
use hannay_core::Error;

type V = [f64; 3];

fn to_py(e: Error) -> PyErr {
    if e.is_usage() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn v(a: V) -> Vec3 {
    Vec3::from_array(a)
}

fn kepler(m: f64, q: f64) -> PyResult<KeplerParams> {
    KeplerParams::new(m, q).map_err(to_py)
}

fn scheme(name: &str) -> PyResult<Scheme> {
    name.parse().map_err(to_py)
}

/// Potential, force and energy of one of the simulated systems.
#[pyclass(name = "Hamiltonian", frozen)]
struct PyHamiltonian {
    spec: HamiltonianSpec,
}

#[pymethods]
impl PyHamiltonian {
    /// Pure Coulomb problem.
    #[staticmethod]
    #[pyo3(signature = (m = 1.0, q = 1.0))]
    fn kepler(m: f64, q: f64) -> PyResult<Self> {
        Ok(Self {
            spec: HamiltonianSpec::kepler(kepler(m, q)?),
        })
    }

    /// Coulomb plus harmonic confinement along z.
    #[staticmethod]
    #[pyo3(signature = (omega0, m = 1.0, q = 1.0))]
    fn fixed_anisotropy(omega0: f64, m: f64, q: f64) -> PyResult<Self> {
        let spec = HamiltonianSpec::fixed_anisotropy(kepler(m, q)?, omega0).map_err(to_py)?;
        Ok(Self { spec })
    }

    /// Confinement axis carried once around a cone by a tanh ramp of `phi`.
    #[staticmethod]
    #[pyo3(signature = (omega0, theta, tau, m = 1.0, q = 1.0))]
    fn rotating_tanh(omega0: f64, theta: f64, tau: f64, m: f64, q: f64) -> PyResult<Self> {
        let protocol = AnisotropyProtocol::tanh_ramp(theta, tau).map_err(to_py)?;
        let spec =
            HamiltonianSpec::rotating_anisotropy(kepler(m, q)?, omega0, protocol).map_err(to_py)?;
        Ok(Self { spec })
    }

    /// Nucleus moving on a circle of radius `rho` with period `t_loop`.
    #[staticmethod]
    #[pyo3(signature = (rho, t_loop, axis = [0.0, 0.0, 1.0], m = 1.0, q = 1.0))]
    fn moving_circle(rho: f64, t_loop: f64, axis: V, m: f64, q: f64) -> PyResult<Self> {
        let path = NucleusPath::circle(Vec3::ZERO, rho, t_loop, v(axis)).map_err(to_py)?;
        Ok(Self {
            spec: HamiltonianSpec::moving_nucleus(kepler(m, q)?, path),
        })
    }

    fn potential(&self, r: V, t: f64) -> PyResult<f64> {
        self.spec.potential_energy(v(r), t).map_err(to_py)
    }

    fn force(&self, r: V, t: f64) -> PyResult<V> {
        self.spec.force(v(r), t).map(Vec3::to_array).map_err(to_py)
    }

    fn energy(&self, r: V, p: V, t: f64) -> PyResult<f64> {
        self.spec
            .total_energy(&PhaseState::new(v(r), v(p)), t)
            .map_err(to_py)
    }

    /// Integrate from `t0` to `t1`; returns `(times, positions, momenta)`
    /// keeping every `stride`-th step plus the final state.
    #[pyo3(signature = (r, p, t0, t1, dt, scheme = "yoshida3", stride = 1))]
    #[allow(clippy::too_many_arguments)]
    fn integrate(
        &self,
        py: Python<'_>,
        r: V,
        p: V,
        t0: f64,
        t1: f64,
        dt: f64,
        scheme: &str,
        stride: u64,
    ) -> PyResult<(Vec<f64>, Vec<V>, Vec<V>)> {
        let cfg = IntegratorConfig::new(self::scheme(scheme)?, dt).map_err(to_py)?;
        let state = PhaseState::new(v(r), v(p));
        let spec = &self.spec;
        let traj = py
            .detach(|| integrator::integrate(spec, &state, t0, t1, &cfg, Sampling::Stride(stride)))
            .map_err(to_py)?;
        Ok((
            traj.times.clone(),
            traj.states.iter().map(|s| s.r.to_array()).collect(),
            traj.states.iter().map(|s| s.p.to_array()).collect(),
        ))
    }

    fn __repr__(&self) -> String {
        format!("Hamiltonian({:?}, omega0={})", self.spec.system, self.spec.omega0)
    }
}

#[pyfunction]
fn rotation_matrix(theta: f64, phi: f64) -> [[f64; 3]; 3] {
    geometry::rotation_matrix(FrameAngles::new(theta, phi)).rows()
}

#[pyfunction]
fn anisotropy_axis(theta: f64, phi: f64) -> V {
    geometry::anisotropy_axis(FrameAngles::new(theta, phi)).to_array()
}

/// Frame-rotation correction from the matrix form.
#[pyfunction]
fn coriolis_correction(p: V, r: V, theta: f64, phi: f64, phi_dot: f64) -> f64 {
    geometry::coriolis_correction(v(p), v(r), FrameAngles::new(theta, phi), phi_dot)
}

/// Same correction from the expanded trigonometric form.
#[pyfunction]
fn coriolis_correction_expanded(p: V, r: V, theta: f64, phi: f64, phi_dot: f64) -> f64 {
    geometry::coriolis_correction_expanded(v(p), v(r), FrameAngles::new(theta, phi), phi_dot)
}

#[pyfunction]
#[pyo3(signature = (r, p, m = 1.0, q = 1.0))]
fn runge_lenz(r: V, p: V, m: f64, q: f64) -> PyResult<V> {
    diagnostics::runge_lenz(&PhaseState::new(v(r), v(p)), kepler(m, q)?)
        .map(Vec3::to_array)
        .map_err(to_py)
}

/// Energy, angular momentum, Runge-Lenz vector, eccentricity, semi-major
/// axis and period of a bound Kepler state.
#[pyfunction]
#[pyo3(signature = (r, p, m = 1.0, q = 1.0))]
fn orbit_elements<'py>(py: Python<'py>, r: V, p: V, m: f64, q: f64) -> PyResult<Bound<'py, PyDict>> {
    let el = diagnostics::orbit_elements(&PhaseState::new(v(r), v(p)), kepler(m, q)?)
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("energy", el.energy)?;
    d.set_item("angular_momentum", el.angular_momentum.to_array())?;
    d.set_item("runge_lenz", el.runge_lenz.to_array())?;
    d.set_item("eccentricity", el.eccentricity)?;
    d.set_item("semi_major", el.semi_major)?;
    d.set_item("period", el.period)?;
    Ok(d)
}

#[pyfunction]
fn dipole_rotation<'py>(py: Python<'py>, a_initial: V, a_final: V, normal: V) -> PyResult<Bound<'py, PyDict>> {
    let rot = diagnostics::dipole_rotation(v(a_initial), v(a_final), v(normal)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("cos_phi", rot.cos_phi)?;
    d.set_item("phi_unsigned", rot.phi_unsigned)?;
    d.set_item("signed_phi_in_plane", rot.signed_phi_in_plane)?;
    Ok(d)
}

#[pyfunction]
fn solid_angle_const_theta(theta: f64) -> PyResult<f64> {
    theory::solid_angle_const_theta(theta).map_err(to_py)
}

#[pyfunction]
fn predicted_cos_phi(theta: f64) -> PyResult<f64> {
    theory::predicted_cos_phi(theta).map_err(to_py)
}

fn sphere_loop(thetas: Vec<f64>, phis: Vec<f64>) -> PyResult<LoopOnSphere> {
    if thetas.len() != phis.len() {
        return Err(PyValueError::new_err("thetas and phis differ in length"));
    }
    LoopOnSphere::new(
        thetas
            .into_iter()
            .zip(phis)
            .map(|(t, p)| FrameAngles::new(t, p))
            .collect(),
    )
    .map_err(to_py)
}

/// Closed-loop integral of `cos(theta) dphi` over sampled angles.
#[pyfunction]
fn hannay_shift(thetas: Vec<f64>, phis: Vec<f64>) -> PyResult<f64> {
    theory::hannay_shift(&sphere_loop(thetas, phis)?).map_err(to_py)
}

/// Closed-loop integral of `(1 - cos(theta)) dphi` over sampled angles.
#[pyfunction]
fn predicted_rotation(thetas: Vec<f64>, phis: Vec<f64>) -> PyResult<f64> {
    theory::predicted_rotation(&sphere_loop(thetas, phis)?).map_err(to_py)
}

#[pyfunction]
fn ponderomotive_omega0(charge: f64, k: f64, mass: f64, omega: f64) -> PyResult<f64> {
    theory::ponderomotive_omega0(charge, k, mass, omega).map_err(to_py)
}

/// In-plane start `(r, p)` for a cone colatitude `theta`.
#[pyfunction]
#[pyo3(signature = (r0, v0, theta, m = 1.0))]
fn make_inplane_state(r0: f64, v0: f64, theta: f64, m: f64) -> PyResult<(V, V)> {
    let s = harness::make_inplane_state(r0, v0, theta, m).map_err(to_py)?;
    Ok((s.r.to_array(), s.p.to_array()))
}

fn record_dict<'py>(py: Python<'py>, r: &RunRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("experiment", r.experiment)?;
    d.set_item("theta", r.theta)?;
    d.set_item("omega0", r.omega0)?;
    d.set_item("tau", r.tau)?;
    d.set_item("dt", r.dt)?;
    d.set_item("steps", r.steps)?;
    d.set_item("cos_phi_3d", r.cos_phi_3d)?;
    d.set_item("cos_phi_projected", r.cos_phi_projected)?;
    d.set_item("cos_phi_pred", r.cos_phi_pred)?;
    d.set_item("abs_err_3d", r.abs_err_3d())?;
    d.set_item("signed_rotation", r.signed_rotation)?;
    d.set_item("z_residual", r.z_residual)?;
    d.set_item("energy_initial", r.energy_initial)?;
    d.set_item("energy_final", r.energy_final)?;
    d.set_item("loop_residual", r.loop_residual)?;
    d.set_item("wall_time_s", r.wall_time_s)?;
    Ok(d)
}

fn row_dict<'py>(py: Python<'py>, r: &SweepRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("theta", r.theta)?;
    d.set_item("cos_theta", r.cos_theta)?;
    d.set_item("omega0", r.omega0)?;
    d.set_item("tau", r.tau)?;
    d.set_item("cos_phi_3d", r.cos_phi_3d)?;
    d.set_item("cos_phi_projected", r.cos_phi_projected)?;
    d.set_item("cos_phi_pred", r.cos_phi_pred)?;
    d.set_item("abs_err_3d", r.abs_err_3d)?;
    d.set_item("z_residual", r.z_residual)?;
    d.set_item("energy_initial", r.energy_initial)?;
    d.set_item("energy_final", r.energy_final)?;
    d.set_item("steps", r.steps)?;
    d.set_item("error_code", &r.error_code)?;
    Ok(d)
}

/// One cone loop at colatitude `theta`.
#[pyfunction]
#[pyo3(signature = (theta, omega0 = 5.0, tau_omega0 = 50.0, steps_per_orbit = 2000.0, settle_orbits = 10.0, scheme = "yoshida3"))]
fn run_fig3<'py>(
    py: Python<'py>,
    theta: f64,
    omega0: f64,
    tau_omega0: f64,
    steps_per_orbit: f64,
    settle_orbits: f64,
    scheme: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let mut p = Fig3Params::new(theta).with_anisotropy(omega0, tau_omega0);
    p.settings.steps_per_orbit = steps_per_orbit;
    p.settings.settle_orbits = settle_orbits;
    p.settings.scheme = self::scheme(scheme)?;
    let rep = py.detach(|| harness::run_fig3_point(&p)).map_err(to_py)?;
    record_dict(py, &rep.record)
}

/// Long fixed-anisotropy run; adds apsis drift and z statistics.
#[pyfunction]
#[pyo3(signature = (omega0 = 0.2, orbits = 3000.0, steps_per_orbit = 2000.0))]
fn run_fig2<'py>(py: Python<'py>, omega0: f64, orbits: f64, steps_per_orbit: f64) -> PyResult<Bound<'py, PyDict>> {
    let mut p = Fig2Params {
        omega0,
        orbits,
        ..Fig2Params::default()
    };
    p.settings.steps_per_orbit = steps_per_orbit;
    let rep = py.detach(|| harness::run_fig2(&p)).map_err(to_py)?;
    let d = record_dict(py, &rep.record)?;
    d.set_item("apsis_rotation", rep.apsis_rotation)?;
    d.set_item("z_mean", rep.z_mean)?;
    d.set_item("envelope_first", rep.envelope_first)?;
    d.set_item("envelope_last", rep.envelope_last)?;
    d.set_item("z_series", rep.z_series().into_iter().map(|(_, z)| z).collect::<Vec<_>>())?;
    Ok(d)
}

/// Nucleus dragged around a circle; adds the apsis angle change.
#[pyfunction]
#[pyo3(signature = (rho = 0.3, t_loop_orbits = 200.0, steps_per_orbit = 2000.0))]
fn run_fig1<'py>(py: Python<'py>, rho: f64, t_loop_orbits: f64, steps_per_orbit: f64) -> PyResult<Bound<'py, PyDict>> {
    let mut p = Fig1Params {
        rho,
        t_loop_orbits,
        ..Fig1Params::default()
    };
    p.settings.steps_per_orbit = steps_per_orbit;
    let rep = py.detach(|| harness::run_fig1(&p)).map_err(to_py)?;
    let d = record_dict(py, &rep.record)?;
    d.set_item("angle_change", rep.angle_change)?;
    Ok(d)
}

/// Cone loops over `thetas`; one dict per point in input order.
#[pyfunction]
#[pyo3(signature = (thetas, omega0 = 5.0, tau_omega0 = 50.0, workers = 1))]
fn sweep_theta<'py>(
    py: Python<'py>,
    thetas: Vec<f64>,
    omega0: f64,
    tau_omega0: f64,
    workers: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let base = Fig3Params::new(thetas.first().copied().unwrap_or(0.0))
        .with_anisotropy(omega0, tau_omega0);
    let rows = py
        .detach(|| harness::sweep_theta(&thetas, &base, workers))
        .map_err(to_py)?;
    rows.iter().map(|r| row_dict(py, r)).collect()
}

/// Run a verification suite; returns `(name, value, passed)` triples.
#[pyfunction]
#[pyo3(signature = (suite = "all", seed = verify::DEFAULT_SEED))]
fn run_verify(py: Python<'_>, suite: &str, seed: u64) -> PyResult<Vec<(String, f64, bool)>> {
    let suite: verify::Suite = suite.parse().map_err(to_py)?;
    let results = py.detach(|| verify::run_suite(suite, seed)).map_err(to_py)?;
    Ok(results
        .into_iter()
        .map(|r| {
            let ok = r.passed();
            (format!("{}: {}", r.suite, r.name), r.value, ok)
        })
        .collect())
}

#[pymodule]
fn hannay(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHamiltonian>()?;
    m.add_function(wrap_pyfunction!(rotation_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(anisotropy_axis, m)?)?;
    m.add_function(wrap_pyfunction!(coriolis_correction, m)?)?;
    m.add_function(wrap_pyfunction!(coriolis_correction_expanded, m)?)?;
    m.add_function(wrap_pyfunction!(runge_lenz, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_elements, m)?)?;
    m.add_function(wrap_pyfunction!(dipole_rotation, m)?)?;
    m.add_function(wrap_pyfunction!(solid_angle_const_theta, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_cos_phi, m)?)?;
    m.add_function(wrap_pyfunction!(hannay_shift, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_rotation, m)?)?;
    m.add_function(wrap_pyfunction!(ponderomotive_omega0, m)?)?;
    m.add_function(wrap_pyfunction!(make_inplane_state, m)?)?;
    m.add_function(wrap_pyfunction!(run_fig1, m)?)?;
    m.add_function(wrap_pyfunction!(run_fig2, m)?)?;
    m.add_function(wrap_pyfunction!(run_fig3, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_theta, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}
