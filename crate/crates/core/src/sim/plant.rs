use nalgebra::{Matrix3, Matrix6, SMatrix, SVector, Vector3, Vector6};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::SimError;
use crate::model::{dynamics_rhs, CableHealth, Integrator, JointInput, PlatformState, RobotParams};

/// Generator family used for every noise stream; written to run headers.
pub const GENERATOR_ID: &str = "ChaCha20Rng/rand_chacha-0.9";
pub const PROCESS_STREAM: u64 = 1;
pub const MEASUREMENT_STREAM: u64 = 2;

/// Seeded generator for one labelled sub-stream.
pub fn noise_stream(seed: u64, stream: u64) -> ChaCha20Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Zero-mean Gaussian sampler with a fixed covariance.
#[derive(Clone, Debug)]
pub struct GaussianNoise<const N: usize> {
    sqrt: SMatrix<f64, N, N>,
}

impl<const N: usize> GaussianNoise<N> {
    /// Uses the symmetric square root of `cov`, so positive semi-definite
    /// (including all-zero) covariances are accepted.
    pub fn new(cov: &SMatrix<f64, N, N>) -> Self {
        let d = nalgebra::DMatrix::from_column_slice(N, N, cov.as_slice());
        let eig = (&d + d.transpose()).scale(0.5).symmetric_eigen();
        let vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
        let s = &eig.eigenvectors * nalgebra::DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
        Self {
            sqrt: SMatrix::from_column_slice(s.as_slice()),
        }
    }

    /// Always consumes `N` normal draws so streams stay aligned across
    /// covariance choices.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> SVector<f64, N> {
        let z = SVector::<f64, N>::from_fn(|_, _| rng.sample(StandardNormal));
        self.sqrt * z
    }
}

const BLOWUP: f64 = 1e6;

fn rhs(
    params: &RobotParams,
    x: &Vector6<f64>,
    input: &JointInput,
    health: &CableHealth,
) -> Result<Vector6<f64>, SimError> {
    Ok(dynamics_rhs(params, &PlatformState::from_vector(x), input, health)?)
}

/// One Euler-Maruyama step with increment `w = omega sqrt(dt)` already drawn.
pub fn plant_step_with(
    params: &RobotParams,
    state: &PlatformState,
    input: &JointInput,
    health: &CableHealth,
    increment: &Vector6<f64>,
    dt: f64,
    integrator: Integrator,
) -> Result<PlatformState, SimError> {
    let x = state.to_vector();
    let next = integrator.step(|z| rhs(params, z, input, health), &x, increment, dt)?;
    if !next.iter().all(|v| v.is_finite() && v.abs() <= BLOWUP) {
        return Err(SimError::NumericalBlowup);
    }
    Ok(PlatformState::from_vector(&next))
}

/// Draws process noise from `rng` and advances the plant by `dt`.
#[allow(clippy::too_many_arguments)]
pub fn plant_step<R: Rng>(
    params: &RobotParams,
    state: &PlatformState,
    input: &JointInput,
    health: &CableHealth,
    noise: &GaussianNoise<6>,
    dt: f64,
    integrator: Integrator,
    rng: &mut R,
) -> Result<PlatformState, SimError> {
    let w = noise.sample(rng) * dt.sqrt();
    plant_step_with(params, state, input, health, &w, dt, integrator)
}

/// Noisy pose measurement.
pub fn measure<R: Rng>(state: &PlatformState, noise: &GaussianNoise<3>, rng: &mut R) -> Vector3<f64> {
    state.pose + noise.sample(rng)
}

pub fn diag6(d: &[f64; 6]) -> Matrix6<f64> {
    Matrix6::from_diagonal(&Vector6::from(*d))
}

pub fn diag3(d: &[f64; 3]) -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::from(*d))
}
