use nalgebra::{DMatrix, Matrix3, Matrix3x6, Matrix6, SMatrix, SVector, Vector3, Vector6};

use super::EstimationError;
use crate::model::{
    dynamics_rhs, wrap_angle, CableHealth, Integrator, JointInput, PlatformState, RobotParams, WorkingMode,
};

/// Absolute step of the central differences used for `F`.
pub const FD_STEP: f64 = 1e-6;

/// Pose-projection measurement Jacobian `[I 0]`.
pub fn measurement_jacobian() -> Matrix3x6<f64> {
    Matrix3x6::identity()
}

/// Mode-conditioned state derivative.
pub fn mode_rhs(
    params: &RobotParams,
    mode: WorkingMode,
    x: &Vector6<f64>,
    input: &JointInput,
) -> Result<Vector6<f64>, EstimationError> {
    let health = CableHealth::for_mode(mode);
    Ok(dynamics_rhs(params, &PlatformState::from_vector(x), input, &health)?)
}

/// Jacobians `(F, H)` of the mode-conditioned model at `x`.
pub fn linearize(
    params: &RobotParams,
    mode: WorkingMode,
    x: &Vector6<f64>,
    input: &JointInput,
) -> Result<(Matrix6<f64>, Matrix3x6<f64>), EstimationError> {
    let mut f = Matrix6::zeros();
    for j in 0..6 {
        let mut up = *x;
        let mut dn = *x;
        up[j] += FD_STEP;
        dn[j] -= FD_STEP;
        let col = (mode_rhs(params, mode, &up, input)? - mode_rhs(params, mode, &dn, input)?) / (2.0 * FD_STEP);
        f.set_column(j, &col);
    }
    Ok((f, measurement_jacobian()))
}

/// Prediction `P- = Phi P Phi^T + Q_k`. The explicit scheme gives
/// `x- = x + f dt` with `Phi = I + F dt`; the drift-implicit scheme matches
/// a plant integrated the same way, with `Phi = (I - F dt)^-1`.
#[allow(clippy::too_many_arguments)]
pub fn ekf_propagate(
    params: &RobotParams,
    mode: WorkingMode,
    x: &Vector6<f64>,
    p: &Matrix6<f64>,
    input: &JointInput,
    q_k: &Matrix6<f64>,
    dt: f64,
    integrator: Integrator,
) -> Result<(Vector6<f64>, Matrix6<f64>), EstimationError> {
    let f = |z: &Vector6<f64>| mode_rhs(params, mode, z, input);
    let xp = integrator.step(f, x, &Vector6::zeros(), dt)?;
    let at = if integrator == Integrator::Explicit { *x } else { xp };
    let (jac, _) = linearize(params, mode, &at, input)?;
    let phi = integrator.transition(&jac, dt);
    let p_prior = phi * p * phi.transpose() + q_k;
    Ok((xp, symmetrize(&p_prior)))
}

/// Result of a measurement update.
#[derive(Clone, Debug)]
pub struct Update {
    pub x: Vector6<f64>,
    pub p: Matrix6<f64>,
    pub innovation: Vector3<f64>,
    pub innovation_cov: Matrix3<f64>,
}

/// Kalman update with a pose measurement; the angle innovation is wrapped.
pub fn ekf_update(
    x: &Vector6<f64>,
    p: &Matrix6<f64>,
    y: &Vector3<f64>,
    r: &Matrix3<f64>,
) -> Result<Update, EstimationError> {
    let h = measurement_jacobian();
    let mut e = y - h * x;
    e.z = wrap_angle(e.z);
    let s = symmetrize(&(h * p * h.transpose() + r));
    let s_inv = checked_inverse(&s)?;
    let k = p * h.transpose() * s_inv;
    let mut x_post = x + k * e;
    x_post[2] = wrap_angle(x_post[2]);
    let p_post = (Matrix6::identity() - k * h) * p;
    Ok(Update {
        x: x_post,
        p: symmetrize(&p_post),
        innovation: e,
        innovation_cov: s,
    })
}

fn checked_inverse<const N: usize>(s: &SMatrix<f64, N, N>) -> Result<SMatrix<f64, N, N>, EstimationError> {
    let dyn_s = DMatrix::from_column_slice(N, N, s.as_slice());
    let sv = dyn_s.singular_values();
    let max = sv.max();
    if !(max > 0.0) || !max.is_finite() || sv.min() / max < 1e-12 {
        return Err(EstimationError::SingularInnovation);
    }
    let inv = dyn_s.try_inverse().ok_or(EstimationError::SingularInnovation)?;
    Ok(SMatrix::from_column_slice(inv.as_slice()))
}

/// Natural log of the Gaussian density of innovation `e` with covariance `s`.
pub fn log_gaussian_likelihood<const N: usize>(
    e: &SVector<f64, N>,
    s: &SMatrix<f64, N, N>,
) -> Result<f64, EstimationError> {
    let s_inv = checked_inverse(s)?;
    let det = DMatrix::from_column_slice(N, N, s.as_slice()).determinant();
    if !(det > 0.0) {
        return Err(EstimationError::SingularInnovation);
    }
    let maha = (e.transpose() * s_inv * e)[(0, 0)];
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(-0.5 * (maha + N as f64 * two_pi.ln() + det.ln()))
}

pub fn gaussian_likelihood<const N: usize>(
    e: &SVector<f64, N>,
    s: &SMatrix<f64, N, N>,
) -> Result<f64, EstimationError> {
    log_gaussian_likelihood(e, s).map(f64::exp)
}

pub fn symmetrize<const N: usize>(p: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    (p + p.transpose()) * 0.5
}
