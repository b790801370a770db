use nalgebra::{DMatrix, Matrix2, Matrix3x4, Vector2, Vector3, Vector4};

use super::mode::WorkingMode;
use super::params::RobotParams;
use super::ModelError;

/// Free lengths below this are treated as a collapsed cable.
pub const MIN_CABLE_LENGTH: f64 = 1e-6;

pub fn rotation(phi: f64) -> Matrix2<f64> {
    let (s, c) = phi.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Planar cross product `a x b` (z component).
#[inline]
pub fn cross2(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Per-cable geometry at one pose and slider configuration.
#[derive(Clone, Debug)]
pub struct CableGeometry {
    /// Free cable lengths `l_p`.
    pub lengths: Vector4<f64>,
    /// Unit pull directions, attachment point toward anchor.
    pub directions: [Vector2<f64>; 4],
    /// World-frame attachment offsets from the platform centre.
    pub arms: [Vector2<f64>; 4],
}

impl CableGeometry {
    /// Wrench per unit tension of cable `i`: `[u; r x u]`.
    pub fn column(&self, i: usize) -> Vector3<f64> {
        let u = &self.directions[i];
        Vector3::new(u.x, u.y, cross2(&self.arms[i], u))
    }

    pub fn full_map(&self) -> Matrix3x4<f64> {
        Matrix3x4::from_columns(&[self.column(0), self.column(1), self.column(2), self.column(3)])
    }
}

/// Computes lengths, directions and moment arms for all four cables.
///
/// Only cables flagged in `checked` may raise `DegenerateCable`; unchecked
/// collapsed cables get a zero direction.
pub fn cable_geometry(
    params: &RobotParams,
    pose: &Vector3<f64>,
    sliders: &Vector4<f64>,
    checked: [bool; 4],
) -> Result<CableGeometry, ModelError> {
    let rot = rotation(pose.z);
    let centre = Vector2::new(pose.x, pose.y);
    let mut lengths = Vector4::zeros();
    let mut directions = [Vector2::zeros(); 4];
    let mut arms = [Vector2::zeros(); 4];
    for i in 0..4 {
        let arm = rot * params.attachment(i);
        let anchor = params.rails[i].anchor(sliders[i]);
        let d = anchor - (centre + arm);
        let l = d.norm();
        if l < MIN_CABLE_LENGTH {
            if checked[i] {
                return Err(ModelError::DegenerateCable { cable: i, length: l });
            }
        } else {
            directions[i] = d / l;
        }
        lengths[i] = l;
        arms[i] = arm;
    }
    Ok(CableGeometry {
        lengths,
        directions,
        arms,
    })
}

/// Free cable lengths for a pose and slider configuration.
pub fn inverse_kinematics(
    params: &RobotParams,
    pose: &Vector3<f64>,
    sliders: &Vector4<f64>,
) -> Result<Vector4<f64>, ModelError> {
    cable_geometry(params, pose, sliders, [true; 4]).map(|g| g.lengths)
}

/// Pulling map restricted to the cables that survive in `mode` (3 x n_c).
pub fn pulling_map(
    params: &RobotParams,
    pose: &Vector3<f64>,
    sliders: &Vector4<f64>,
    mode: WorkingMode,
) -> Result<DMatrix<f64>, ModelError> {
    let geom = cable_geometry(params, pose, sliders, mode.surviving())?;
    let cols: Vec<Vector3<f64>> = mode.surviving_cables().into_iter().map(|i| geom.column(i)).collect();
    Ok(DMatrix::from_fn(3, cols.len(), |r, c| cols[c][r]))
}
