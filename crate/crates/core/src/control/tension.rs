use nalgebra::{DMatrix, DVector, Vector4};

use super::kappa::null_vector;
use super::ControlError;

/// Smallest tensions along the positive null direction of `p` that keep
/// every cable at or above `tau_min`.
pub fn tension_distribution(p: &DMatrix<f64>, tau_min: f64) -> Result<DVector<f64>, ControlError> {
    let n = null_vector(p).ok_or(ControlError::Infeasible)?;
    if !n.iter().all(|&v| v > 0.0) {
        return Err(ControlError::Infeasible);
    }
    let scale = tau_min / n.min();
    // The scaled minimum can land an ulp below tau_min.
    Ok((n * scale).map(|t| t.max(tau_min)))
}

/// Spool commands `theta_i = l_p,i - tau_i / k_i` for surviving cables;
/// lost cables keep their previous spool value.
pub fn compute_joint_angles(
    lengths: &Vector4<f64>,
    stiffness: &Vector4<f64>,
    tensions: &Vector4<f64>,
    surviving: [bool; 4],
    previous: &Vector4<f64>,
) -> Vector4<f64> {
    Vector4::from_fn(|i, _| {
        if surviving[i] {
            lengths[i] - tensions[i] / stiffness[i]
        } else {
            previous[i]
        }
    })
}
