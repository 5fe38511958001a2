//! Small fixed-size 3D helpers: vectors, rotation matrices and rigid poses.

use serde::{Deserialize, Serialize};

pub type Vec3 = [f64; 3];

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b))
}

pub fn is_finite(a: Vec3) -> bool {
    a.iter().all(|x| x.is_finite())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn unit(self) -> Vec3 {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
        }
    }
}

/// Row-major 3x3 rotation matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rot3(pub [[f64; 3]; 3]);

impl Default for Rot3 {
    fn default() -> Self {
        Rot3::IDENTITY
    }
}

impl Rot3 {
    pub const IDENTITY: Rot3 = Rot3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn about(axis: Axis, angle: f64) -> Rot3 {
        let (s, c) = angle.sin_cos();
        match axis {
            Axis::X => Rot3([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]),
            Axis::Y => Rot3([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]),
            Axis::Z => Rot3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]),
        }
    }

    /// Yaw about z followed by pitch about the rotated y axis.
    pub fn from_yaw_pitch(yaw: f64, pitch: f64) -> Rot3 {
        Rot3::about(Axis::Z, yaw).mul(&Rot3::about(Axis::Y, pitch))
    }

    pub fn from_rows(v: &[f64]) -> Rot3 {
        Rot3([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]])
    }

    pub fn rows(&self) -> [f64; 9] {
        let m = &self.0;
        [m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2]]
    }

    pub fn mul(&self, other: &Rot3) -> Rot3 {
        let a = &self.0;
        let b = &other.0;
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        Rot3(out)
    }

    pub fn transpose(&self) -> Rot3 {
        let m = &self.0;
        Rot3([[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]])
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Rᵀ v without materializing the transpose.
    pub fn apply_transpose(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
            m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
            m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Max-abs deviation of RᵀR from I, and of det(R) from +1, both within `tol`.
    pub fn is_orthonormal(&self, tol: f64) -> bool {
        if !self.0.iter().flatten().all(|x| x.is_finite()) {
            return false;
        }
        let rtr = self.transpose().mul(self);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (rtr.0[i][j] - expect).abs() > tol {
                    return false;
                }
            }
        }
        (self.det() - 1.0).abs() <= tol
    }
}

/// Tolerance used for every orthonormality check on input rotations.
pub const ORTHO_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub pos: Vec3,
    pub rot: Rot3,
}

impl Pose {
    pub const IDENTITY: Pose = Pose { pos: [0.0; 3], rot: Rot3::IDENTITY };

    pub fn new(pos: Vec3, rot: Rot3) -> Self {
        Pose { pos, rot }
    }

    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        add(self.pos, self.rot.apply(p))
    }

    /// `self` followed by `child` expressed in `self`'s frame.
    pub fn compose(&self, child: &Pose) -> Pose {
        Pose { pos: self.transform_point(child.pos), rot: self.rot.mul(&child.rot) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotations_are_orthonormal() {
        for &a in &[0.0, 0.3, -1.7, 3.0] {
            for axis in [Axis::X, Axis::Y, Axis::Z] {
                assert!(Rot3::about(axis, a).is_orthonormal(1e-12));
            }
            assert!(Rot3::from_yaw_pitch(a, -a / 2.0).is_orthonormal(1e-12));
        }
        assert!(!Rot3([[0.0; 3]; 3]).is_orthonormal(ORTHO_TOL));
        let mirror = Rot3([[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(!mirror.is_orthonormal(ORTHO_TOL));
    }

    #[test]
    fn quarter_turn_about_z() {
        let r = Rot3::about(Axis::Z, std::f64::consts::FRAC_PI_2);
        let v = r.apply([1.0, 0.0, 0.0]);
        assert!((v[0]).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
        let back = r.apply_transpose(v);
        assert!((back[0] - 1.0).abs() < 1e-15);
    }
}
