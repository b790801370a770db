use nalgebra::{Matrix6, Vector6};
use serde::{Deserialize, Serialize};

/// Time discretisation of the motion model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// `x_k = x_{k-1} + f(x_{k-1}) dt + w`.
    Explicit,
    /// `x_k = x_{k-1} + f(x_k) dt + w`, solved by Newton iteration. The
    /// drift is evaluated at the new state so damping always dissipates.
    #[default]
    DriftImplicit,
}

/// Central-difference Jacobian of `f` at `x`.
pub fn drift_jacobian<E>(
    f: &impl Fn(&Vector6<f64>) -> Result<Vector6<f64>, E>,
    x: &Vector6<f64>,
    h: f64,
) -> Result<Matrix6<f64>, E> {
    let mut j = Matrix6::zeros();
    for c in 0..6 {
        let mut up = *x;
        let mut dn = *x;
        up[c] += h;
        dn[c] -= h;
        j.set_column(c, &((f(&up)? - f(&dn)?) / (2.0 * h)));
    }
    Ok(j)
}

impl Integrator {
    /// Advances `x` by `dt` under drift `f` plus the increment `w`.
    pub fn step<E>(
        self,
        f: impl Fn(&Vector6<f64>) -> Result<Vector6<f64>, E>,
        x: &Vector6<f64>,
        w: &Vector6<f64>,
        dt: f64,
    ) -> Result<Vector6<f64>, E> {
        let explicit = x + f(x)? * dt + w;
        if self == Integrator::Explicit {
            return Ok(explicit);
        }
        let mut z = explicit;
        for _ in 0..30 {
            let g = z - x - f(&z)? * dt - w;
            let jac = Matrix6::identity() - drift_jacobian(&f, &z, 1e-7)? * dt;
            let Some(step) = jac.lu().solve(&g) else { break };
            z -= step;
            if step.norm() <= 1e-14 * (1.0 + z.norm()) {
                break;
            }
        }
        Ok(z)
    }

    /// State transition matrix of one step given the drift Jacobian `jac`,
    /// taken at the old state for the explicit scheme and at the new state
    /// for the implicit one.
    pub fn transition(self, jac: &Matrix6<f64>, dt: f64) -> Matrix6<f64> {
        match self {
            Integrator::Explicit => Matrix6::identity() + jac * dt,
            Integrator::DriftImplicit => (Matrix6::identity() - jac * dt)
                .try_inverse()
                .unwrap_or_else(|| Matrix6::identity() + jac * dt),
        }
    }
}
