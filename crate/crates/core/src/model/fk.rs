use nalgebra::{Matrix3, Vector3};

use super::dynamics::{cable_wrench, elastic_energy};
use super::health::CableHealth;
use super::params::RobotParams;
use super::state::{wrap_angle, JointInput};
use super::ModelError;

/// Damped-Newton (Levenberg-Marquardt) settings for the energy minimiser.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FkSettings {
    pub lambda0: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for FkSettings {
    fn default() -> Self {
        Self {
            lambda0: 1e-3,
            lambda_up: 10.0,
            lambda_down: 10.0,
            grad_tol: 1e-10,
            max_iter: 100,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FkSolution {
    pub pose: Vector3<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
}

// The energy gradient is minus the net cable wrench.
fn gradient(
    params: &RobotParams,
    pose: &Vector3<f64>,
    input: &JointInput,
    health: &CableHealth,
) -> Result<Vector3<f64>, ModelError> {
    cable_wrench(params, pose, input, health).map(|w| -w)
}

fn hessian(
    params: &RobotParams,
    pose: &Vector3<f64>,
    input: &JointInput,
    health: &CableHealth,
) -> Result<Matrix3<f64>, ModelError> {
    let h = 1e-7;
    let mut hess = Matrix3::zeros();
    for j in 0..3 {
        let mut up = *pose;
        let mut dn = *pose;
        up[j] += h;
        dn[j] -= h;
        let col = (gradient(params, &up, input, health)? - gradient(params, &dn, input, health)?) / (2.0 * h);
        hess.set_column(j, &col);
    }
    Ok(0.5 * (hess + hess.transpose()))
}

/// Static pose of the platform for a joint input: the minimiser of the
/// total cable energy, found by Levenberg-Marquardt from `guess`.
pub fn forward_kinematics(
    params: &RobotParams,
    input: &JointInput,
    health: &CableHealth,
    guess: &Vector3<f64>,
) -> Result<FkSolution, ModelError> {
    forward_kinematics_with(params, input, health, guess, &FkSettings::default())
}

pub fn forward_kinematics_with(
    params: &RobotParams,
    input: &JointInput,
    health: &CableHealth,
    guess: &Vector3<f64>,
    settings: &FkSettings,
) -> Result<FkSolution, ModelError> {
    let mut pose = *guess;
    let mut energy = elastic_energy(params, &pose, input, health)?;
    let mut grad = gradient(params, &pose, input, health)?;
    let mut lambda = settings.lambda0;
    let term_scale: f64 = params.specific_stiffness.iter().sum::<f64>() * params.frame_width.hypot(params.frame_height);

    for iter in 0..settings.max_iter {
        let gn = grad.norm();
        if gn <= settings.grad_tol {
            pose.z = wrap_angle(pose.z);
            return Ok(FkSolution {
                pose,
                iterations: iter,
                grad_norm: gn,
            });
        }
        let hess = hessian(params, &pose, input, health)?;
        let dmax = hess.diagonal().max().max(0.0);
        let floor = (1e-8 * dmax).max(1e-12);
        let scale = hess.diagonal().map(|d| d.max(floor));

        let mut accepted = false;
        while lambda < 1e20 {
            let damped = hess + Matrix3::from_diagonal(&(scale * lambda));
            let Some(step) = damped.lu().solve(&(-grad)) else {
                lambda *= settings.lambda_up;
                continue;
            };
            let trial = pose + step;
            let outcome = elastic_energy(params, &trial, input, health)
                .and_then(|e| gradient(params, &trial, input, health).map(|g| (e, g)));
            if let Ok((e_new, g_new)) = outcome {
                // Near the optimum the energy change drops below round-off,
                // which scales with the uncancelled cable terms (about k0 l),
                // so a non-increase combined with a smaller gradient counts.
                let slack = 1e-13 * (energy.abs() + term_scale);
                if e_new < energy - slack || (e_new <= energy + slack && g_new.norm() < gn) {
                    pose = trial;
                    energy = e_new;
                    grad = g_new;
                    lambda = (lambda / settings.lambda_down).max(1e-12);
                    accepted = true;
                    break;
                }
            }
            lambda *= settings.lambda_up;
        }
        if !accepted {
            return Err(ModelError::NoConvergence {
                iterations: iter + 1,
                grad_norm: gn,
            });
        }
    }
    let gn = grad.norm();
    if gn <= settings.grad_tol {
        pose.z = wrap_angle(pose.z);
        Ok(FkSolution {
            pose,
            iterations: settings.max_iter,
            grad_norm: gn,
        })
    } else {
        Err(ModelError::NoConvergence {
            iterations: settings.max_iter,
            grad_norm: gn,
        })
    }
}
