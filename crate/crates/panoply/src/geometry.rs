//! Small 3-D rotation utilities shared across the crate.

use nalgebra::{Matrix3, Unit, Vector3};

use crate::error::{Error, Result};

/// Tolerance for orthonormality and determinant checks on rotations.
pub const ROTATION_TOL: f64 = 1e-9;

/// A proper rotation (orthonormal, det = +1 within [`ROTATION_TOL`]).
///
/// Construction through [`RotationMatrix::from_matrix`] validates the
/// invariant; the trigonometric constructors satisfy it by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn identity() -> Self {
        RotationMatrix(Matrix3::identity())
    }

    /// Wraps a matrix after checking RᵀR = I and det = +1.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let ortho_dev = (m.transpose() * m - Matrix3::identity()).amax();
        let det_dev = (m.determinant() - 1.0).abs();
        if ortho_dev > ROTATION_TOL || det_dev > ROTATION_TOL {
            return Err(Error::invalid_input(format!(
                "matrix is not a proper rotation (orthonormality deviation {ortho_dev:.3e}, \
                 determinant deviation {det_dev:.3e})"
            )));
        }
        Ok(RotationMatrix(m))
    }

    /// Wraps a row-major 9-tuple, validating as in [`RotationMatrix::from_matrix`].
    pub fn from_row_major(r: &[f64; 9]) -> Result<Self> {
        Self::from_matrix(Matrix3::new(
            r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8],
        ))
    }

    /// Rotation about the x axis (right-handed).
    pub fn about_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RotationMatrix(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    /// Rotation about the y axis (right-handed).
    pub fn about_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RotationMatrix(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
    }

    /// Axis-angle (Rodrigues) rotation; the axis is normalized.
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64) -> Self {
        let rot = nalgebra::Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        RotationMatrix(*rot.matrix())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
        ]
    }

    /// The inverse rotation (transpose).
    pub fn transpose(&self) -> Self {
        RotationMatrix(self.0.transpose())
    }

    /// `self * rhs` (apply `rhs` first, then `self`).
    pub fn compose(&self, rhs: &RotationMatrix) -> Self {
        RotationMatrix(self.0 * rhs.0)
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Applies the inverse rotation (world → camera for a camera-to-world pose).
    pub fn apply_inverse(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0.transpose() * v
    }
}
