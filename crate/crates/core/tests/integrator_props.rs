use hannay_core::diagnostics::{orbit_elements, pericentre_times, stroboscopic};
use hannay_core::geometry::Vec3;
use hannay_core::hamiltonians::{HamiltonianSpec, KeplerParams, PhaseState};
use hannay_core::integrator::{integrate, IntegratorConfig, Sampling, Scheme};

fn reference() -> (HamiltonianSpec, PhaseState, f64) {
    let kepler = KeplerParams::default();
    let state = PhaseState::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.75, 0.0));
    let period = orbit_elements(&state, kepler).unwrap().period;
    (HamiltonianSpec::kepler(kepler), state, period)
}

#[test]
fn static_orbit_returns_to_its_start_every_period() {
    let (spec, s0, period) = reference();
    let cfg = IntegratorConfig::new(Scheme::Yoshida3, period / 2000.0).unwrap();
    let traj = integrate(&spec, &s0, 0.0, 10.0 * period, &cfg, Sampling::Stroboscopic { period }).unwrap();
    let strobes = stroboscopic(&traj, period);
    assert!(strobes.len() >= 10);
    for (_, s) in strobes {
        assert!(s.max_abs_diff(&s0) < 1e-6, "{s:?}");
    }
}

#[test]
fn pericentre_spacing_matches_kepler_period() {
    let (spec, s0, period) = reference();
    let cfg = IntegratorConfig::new(Scheme::Yoshida3, period / 4000.0).unwrap();
    let traj = integrate(&spec, &s0, 0.0, 5.5 * period, &cfg, Sampling::Stride(1)).unwrap();
    let times = pericentre_times(&traj);
    assert_eq!(times.len(), 5);
    for w in times.windows(2) {
        assert!(((w[1] - w[0]) / period - 1.0).abs() < 1e-4);
    }
}

#[test]
fn fixed_anisotropy_keeps_axial_angular_momentum() {
    let kepler = KeplerParams::default();
    let spec = HamiltonianSpec::fixed_anisotropy(kepler, 0.5).unwrap();
    let s0 = PhaseState::new(Vec3::new(1.0, 0.0, 0.2), Vec3::new(0.0, 0.7, 0.1));
    let cfg = IntegratorConfig::new(Scheme::Yoshida3, 0.002).unwrap();
    let traj = integrate(&spec, &s0, 0.0, 200.0, &cfg, Sampling::Stride(50)).unwrap();
    let lz0 = s0.angular_momentum().z;
    let e0 = spec.total_energy(&s0, 0.0).unwrap();
    for (t, s) in traj.iter() {
        assert!((s.angular_momentum().z - lz0).abs() < 1e-10 * lz0.abs().max(1.0));
        assert!((spec.total_energy(s, t).unwrap() - e0).abs() < 1e-7 * e0.abs());
    }
}

#[test]
fn both_schemes_agree_on_a_short_run() {
    let (spec, s0, period) = reference();
    let finish = |scheme| {
        let cfg = IntegratorConfig::new(scheme, period / 4000.0).unwrap();
        integrate(&spec, &s0, 0.0, period, &cfg, Sampling::Endpoints).unwrap().last().1
    };
    let v = finish(Scheme::Verlet2);
    let y = finish(Scheme::Yoshida3);
    assert!(v.max_abs_diff(&y) < 1e-5);
}

#[test]
fn zero_length_interval_keeps_only_the_start() {
    let (spec, s0, _) = reference();
    let cfg = IntegratorConfig::new(Scheme::Verlet2, 0.01).unwrap();
    let traj = integrate(&spec, &s0, 2.0, 2.0, &cfg, Sampling::Stride(1)).unwrap();
    assert_eq!(traj.len(), 1);
    assert_eq!(traj.first(), (2.0, s0));
}

#[test]
fn invalid_step_is_rejected() {
    assert!(IntegratorConfig::new(Scheme::Verlet2, 0.0).is_err());
    assert!(IntegratorConfig::new(Scheme::Verlet2, f64::NAN).is_err());
}

#[test]
fn close_approach_trips_the_radius_guard() {
    let kepler = KeplerParams::default();
    let spec = HamiltonianSpec::kepler(kepler).with_r_min_guard(0.05).unwrap();
    let s0 = PhaseState::new(Vec3::X, Vec3::new(0.0, 0.01, 0.0));
    let cfg = IntegratorConfig::new(Scheme::Yoshida3, 1e-3).unwrap();
    let err = integrate(&spec, &s0, 0.0, 5.0, &cfg, Sampling::Endpoints).unwrap_err();
    assert!(err.to_string().starts_with("MinRadiusViolation"), "{err}");
}
