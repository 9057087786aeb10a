//! 3-vectors, the anisotropy-frame rotation matrix and the Coriolis term that
//! appears when the frame turns about the fixed z axis.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cartesian 3-vector in simulation units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Component of `self` orthogonal to the unit vector `n`.
    pub fn reject_from(self, n: Vec3) -> Vec3 {
        self - n * self.dot(n)
    }

    pub fn max_abs_diff(self, other: Vec3) -> f64 {
        let d = self - other;
        d.x.abs().max(d.y.abs()).max(d.z.abs())
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Orientation of the anisotropy axis: colatitude `theta` in `[0, pi]` and
/// unwrapped azimuth `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameAngles {
    pub theta: f64,
    pub phi: f64,
}

impl FrameAngles {
    pub const fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// Like [`FrameAngles::new`] but rejects a colatitude outside `[0, pi]`
    /// instead of folding it back.
    pub fn checked(theta: f64, phi: f64) -> Result<Self> {
        check_colatitude(theta)?;
        if !phi.is_finite() {
            return Err(Error::Domain(format!("azimuth must be finite, got {phi}")));
        }
        Ok(Self { theta, phi })
    }
}

pub(crate) fn check_colatitude(theta: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Domain(format!(
            "colatitude {theta} outside [0, pi]"
        )));
    }
    Ok(())
}

/// Row-major 3x3 matrix. Only ever holds proper rotations in this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(pub [[f64; 3]; 3]);

impl RotationMatrix {
    pub const IDENTITY: RotationMatrix =
        RotationMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn rows(&self) -> [[f64; 3]; 3] {
        self.0
    }

    pub fn column(&self, j: usize) -> Vec3 {
        Vec3::new(self.0[0][j], self.0[1][j], self.0[2][j])
    }

    pub fn transpose(&self) -> RotationMatrix {
        let m = &self.0;
        RotationMatrix([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn matmul(&self, other: &RotationMatrix) -> RotationMatrix {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        RotationMatrix(out)
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &RotationMatrix) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        worst
    }
}

/// Rotation taking anisotropy-frame components `(X, Y, Z)` to fixed-frame
/// components `(x, y, z)`. Its columns are the unit vectors
/// `phi_hat`, `theta_hat` and the anisotropy axis.
pub fn rotation_matrix(angles: FrameAngles) -> RotationMatrix {
    let (st, ct) = angles.theta.sin_cos();
    let (sp, cp) = angles.phi.sin_cos();
    RotationMatrix([
        [cp, ct * sp, st * sp],
        [-sp, ct * cp, st * cp],
        [0.0, -st, ct],
    ])
}

/// Entry-wise derivative of [`rotation_matrix`] with respect to `phi`.
pub fn rotation_matrix_dphi(angles: FrameAngles) -> RotationMatrix {
    let (st, ct) = angles.theta.sin_cos();
    let (sp, cp) = angles.phi.sin_cos();
    RotationMatrix([
        [-sp, ct * cp, st * cp],
        [-cp, -ct * sp, -st * sp],
        [0.0, 0.0, 0.0],
    ])
}

/// Unit vector of the anisotropy (easy-plane normal) axis.
pub fn anisotropy_axis(angles: FrameAngles) -> Vec3 {
    let (st, ct) = angles.theta.sin_cos();
    let (sp, cp) = angles.phi.sin_cos();
    Vec3::new(st * sp, st * cp, ct)
}

/// Correction `dH = -P . R^T (dR/dphi) r * phi_dot` picked up by the
/// Hamiltonian in the turning frame. `momentum` and `position` are the
/// rotating-frame components `(P_x, P_y, P_z)` and `(X, Y, Z)`.
pub fn coriolis_correction(
    momentum: Vec3,
    position: Vec3,
    angles: FrameAngles,
    phi_dot: f64,
) -> f64 {
    let generator = rotation_matrix(angles)
        .transpose()
        .matmul(&rotation_matrix_dphi(angles));
    -momentum.dot(generator.apply(position)) * phi_dot
}

/// Expanded trigonometric form of [`coriolis_correction`]:
/// `{cos(theta) (P_y X - P_x Y) - sin(theta) (P_x Z - P_z X)} phi_dot`.
///
/// This equals `phi_dot * (z_hat . L)` written in rotating-frame components.
/// The matrix and expanded forms agree identically, including sign.
pub fn coriolis_correction_expanded(
    momentum: Vec3,
    position: Vec3,
    angles: FrameAngles,
    phi_dot: f64,
) -> f64 {
    let (st, ct) = angles.theta.sin_cos();
    let (px, py, pz) = (momentum.x, momentum.y, momentum.z);
    let (x, y, z) = (position.x, position.y, position.z);
    (ct * (py * x - px * y) - st * (px * z - pz * x)) * phi_dot
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn assert_matrix_close(m: &RotationMatrix, expected: [[f64; 3]; 3], tol: f64) {
        assert!(
            m.max_abs_diff(&RotationMatrix(expected)) <= tol,
            "{m:?} != {expected:?}"
        );
    }

    #[test]
    fn rotation_at_pole_is_identity() {
        let r = rotation_matrix(FrameAngles::new(0.0, 0.0));
        assert_matrix_close(&r, RotationMatrix::IDENTITY.0, 0.0);
    }

    #[test]
    fn rotation_at_equator_matches_substitution() {
        let r = rotation_matrix(FrameAngles::new(FRAC_PI_2, 0.0));
        assert_matrix_close(&r, [[1., 0., 0.], [0., 0., 1.], [0., -1., 0.]], 1e-16);
    }

    #[test]
    fn axis_examples() {
        let a = anisotropy_axis(FrameAngles::new(0.0, 1.234));
        assert!(a.max_abs_diff(Vec3::Z) < 1e-16);
        let a = anisotropy_axis(FrameAngles::new(FRAC_PI_2, 0.0));
        assert!(a.max_abs_diff(Vec3::Y) < 1e-16);
        let a = anisotropy_axis(FrameAngles::new(FRAC_PI_2, FRAC_PI_2));
        assert!(a.max_abs_diff(Vec3::X) < 1e-16);
    }

    #[test]
    fn coriolis_vanishes_without_rotation() {
        let v = coriolis_correction(
            Vec3::new(0.3, -1.2, 0.7),
            Vec3::new(1.0, 2.0, -0.5),
            FrameAngles::new(0.4, 2.0),
            0.0,
        );
        assert_eq!(v, 0.0);
    }

    #[test]
    fn coriolis_at_pole_is_p_phi_times_rate() {
        // R^T dR/dphi at the pole maps (1,0,0) to (0,-1,0), so dH = +p_phi.
        let v = coriolis_correction(Vec3::Y, Vec3::X, FrameAngles::new(0.0, 0.0), 1.0);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn checked_angles_reject_bad_colatitude() {
        assert!(FrameAngles::checked(-0.1, 0.0).is_err());
        assert!(FrameAngles::checked(3.2, 0.0).is_err());
        assert!(FrameAngles::checked(PI, 10.0).is_ok());
    }

    #[test]
    fn dphi_matches_central_difference() {
        let a = FrameAngles::new(0.7, 1.9);
        let h = 1e-6;
        let plus = rotation_matrix(FrameAngles::new(a.theta, a.phi + h));
        let minus = rotation_matrix(FrameAngles::new(a.theta, a.phi - h));
        let d = rotation_matrix_dphi(a);
        for i in 0..3 {
            for j in 0..3 {
                let fd = (plus.0[i][j] - minus.0[i][j]) / (2.0 * h);
                assert!((fd - d.0[i][j]).abs() < 1e-9);
            }
        }
    }

    fn angles() -> impl Strategy<Value = FrameAngles> {
        (0.0..=PI, -20.0..20.0f64).prop_map(|(t, p)| FrameAngles::new(t, p))
    }

    fn vec3() -> impl Strategy<Value = Vec3> {
        (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn rotation_is_proper_orthogonal(a in angles()) {
            let r = rotation_matrix(a);
            let rtr = r.transpose().matmul(&r);
            prop_assert!(rtr.max_abs_diff(&RotationMatrix::IDENTITY) <= 1e-12);
            prop_assert!((r.determinant() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn axis_is_third_column(a in angles()) {
            let r = rotation_matrix(a);
            let z = anisotropy_axis(a);
            prop_assert!(z.max_abs_diff(r.apply(Vec3::Z)) <= 1e-14);
            prop_assert!((z.norm() - 1.0).abs() <= 1e-14);
        }

        #[test]
        fn generator_is_antisymmetric(a in angles()) {
            let g = rotation_matrix(a).transpose().matmul(&rotation_matrix_dphi(a));
            prop_assert!(g.max_abs_diff(&g.transpose().scaled(-1.0)) <= 1e-12);
        }

        #[test]
        fn coriolis_forms_agree(p in vec3(), r in vec3(), a in angles(), w in -2.0..2.0f64) {
            let m = coriolis_correction(p, r, a, w);
            let t = coriolis_correction_expanded(p, r, a, w);
            prop_assert!((m - t).abs() <= 1e-12);
        }

        #[test]
        fn coriolis_is_linear(p in vec3(), q in vec3(), r in vec3(), a in angles(),
                              w in -2.0..2.0f64, s in -2.0..2.0f64) {
            let base = coriolis_correction(p, r, a, w);
            prop_assert!((coriolis_correction(p, r, a, s * w) - s * base).abs() <= 1e-12);
            prop_assert!((coriolis_correction(p * s, r, a, w) - s * base).abs() <= 1e-12);
            prop_assert!((coriolis_correction(p, r * s, a, w) - s * base).abs() <= 1e-12);
            let sum = coriolis_correction(p + q, r, a, w);
            prop_assert!((sum - base - coriolis_correction(q, r, a, w)).abs() <= 1e-12);
        }

        #[test]
        fn cross_is_orthogonal_and_antisymmetric(u in vec3(), v in vec3()) {
            let c = u.cross(v);
            prop_assert!(c.dot(u).abs() <= 1e-12);
            prop_assert!(c.dot(v).abs() <= 1e-12);
            prop_assert!((c + v.cross(u)).norm() <= 1e-15);
        }
    }

    impl RotationMatrix {
        fn scaled(&self, s: f64) -> RotationMatrix {
            let mut m = self.0;
            m.iter_mut().flatten().for_each(|v| *v *= s);
            RotationMatrix(m)
        }
    }
}
