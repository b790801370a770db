use nalgebra::{Vector3, Vector4, Vector6};

use super::health::CableHealth;
use super::kinematics::{cable_geometry, CableGeometry};
use super::params::RobotParams;
use super::state::{JointInput, PlatformState};
use super::ModelError;

fn active(health: &CableHealth) -> [bool; 4] {
    health.multipliers.map(|s| s > 0.0)
}

/// Unilateral spring tension of one cable with rate `s * k0 / l`.
#[inline]
pub fn cable_tension(k0: f64, s: f64, length: f64, spool: f64) -> f64 {
    if s <= 0.0 || length <= 0.0 {
        return 0.0;
    }
    (s * k0 / length * (length - spool)).max(0.0)
}

/// Elastic energy stored in one cable. Its derivative with respect to the
/// free length is exactly [`cable_tension`], which makes static equilibria of
/// the dynamics coincide with stationary points of the total energy.
#[inline]
pub fn cable_energy(k0: f64, s: f64, length: f64, spool: f64) -> f64 {
    if s <= 0.0 || length <= spool {
        return 0.0;
    }
    if spool <= 0.0 {
        return s * k0 * (length - spool.max(0.0));
    }
    s * k0 * (length - spool - spool * (length / spool).ln())
}

pub fn tensions_from_geometry(
    params: &RobotParams,
    geom: &CableGeometry,
    spools: &Vector4<f64>,
    health: &CableHealth,
) -> Vector4<f64> {
    Vector4::from_fn(|i, _| {
        cable_tension(
            params.specific_stiffness[i],
            health.multipliers[i],
            geom.lengths[i],
            spools[i],
        )
    })
}

/// Plant-side cable tensions, clamped at zero for slack cables.
pub fn cable_tensions(
    params: &RobotParams,
    pose: &Vector3<f64>,
    sliders: &Vector4<f64>,
    spools: &Vector4<f64>,
    health: &CableHealth,
) -> Result<Vector4<f64>, ModelError> {
    let geom = cable_geometry(params, pose, sliders, active(health))?;
    Ok(tensions_from_geometry(params, &geom, spools, health))
}

/// Net cable wrench `P K_q (l_p - theta)` on the platform.
pub fn cable_wrench(
    params: &RobotParams,
    pose: &Vector3<f64>,
    input: &JointInput,
    health: &CableHealth,
) -> Result<Vector3<f64>, ModelError> {
    let geom = cable_geometry(params, pose, &input.sliders, active(health))?;
    let tau = tensions_from_geometry(params, &geom, &input.spools, health);
    let mut w = Vector3::zeros();
    for i in 0..4 {
        if tau[i] > 0.0 {
            w += geom.column(i) * tau[i];
        }
    }
    Ok(w)
}

/// State derivative of the elastic-cable platform (gravity-free plane).
pub fn dynamics_rhs(
    params: &RobotParams,
    state: &PlatformState,
    input: &JointInput,
    health: &CableHealth,
) -> Result<Vector6<f64>, ModelError> {
    let w = cable_wrench(params, &state.pose, input, health)?;
    let v = &state.velocity;
    let acc = Vector3::new(
        (w.x - params.damping[0] * v.x) / params.mass,
        (w.y - params.damping[1] * v.y) / params.mass,
        (w.z - params.damping[2] * v.z) / params.inertia,
    );
    let mut xdot = Vector6::zeros();
    xdot.fixed_rows_mut::<3>(0).copy_from(v);
    xdot.fixed_rows_mut::<3>(3).copy_from(&acc);
    Ok(xdot)
}

/// Total elastic energy of the cables at `pose`.
pub fn elastic_energy(
    params: &RobotParams,
    pose: &Vector3<f64>,
    input: &JointInput,
    health: &CableHealth,
) -> Result<f64, ModelError> {
    let geom = cable_geometry(params, pose, &input.sliders, active(health))?;
    Ok((0..4)
        .map(|i| {
            cable_energy(
                params.specific_stiffness[i],
                health.multipliers[i],
                geom.lengths[i],
                input.spools[i],
            )
        })
        .sum())
}

pub fn kinetic_energy(params: &RobotParams, state: &PlatformState) -> f64 {
    let v = &state.velocity;
    0.5 * (params.mass * (v.x * v.x + v.y * v.y) + params.inertia * v.z * v.z)
}

pub fn mechanical_energy(
    params: &RobotParams,
    state: &PlatformState,
    input: &JointInput,
    health: &CableHealth,
) -> Result<f64, ModelError> {
    Ok(kinetic_energy(params, state) + elastic_energy(params, &state.pose, input, health)?)
}

/// Pose-only measurement `y = x_e`.
pub fn measurement(state: &PlatformState) -> Vector3<f64> {
    state.pose
}
