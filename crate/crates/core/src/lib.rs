//! Anisotropic Kepler orbits under a slowly turning easy axis.
//!
//! The crate integrates an electron in a Coulomb potential plus a uniaxial
//! harmonic confinement whose axis can be rotated in time, measures how the
//! Runge-Lenz vector (the orbit's dipole direction) turns, and compares the
//! result with the geometric-phase prediction: after one closed loop of the
//! axis the apsis line turns by the solid angle swept by the axis.
//!
//! Units are dimensionless with electron mass `m` and Coulomb strength `Q`
//! both defaulting to 1.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod hamiltonians;
pub mod harness;
pub mod integrator;
pub mod protocols;
pub mod theory;
pub mod verify;

pub use diagnostics::{dipole_rotation, orbit_elements, runge_lenz, DipoleRotation, OrbitElements};
pub use error::{Error, Result};
pub use geometry::{FrameAngles, RotationMatrix, Vec3};
pub use hamiltonians::{HamiltonianSpec, KeplerParams, PhaseState};
pub use integrator::{integrate, IntegratorConfig, Sampling, Scheme, Trajectory};
pub use protocols::{AnisotropyProtocol, NucleusPath};
