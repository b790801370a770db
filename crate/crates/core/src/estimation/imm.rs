use nalgebra::{DMatrix, Matrix3, Matrix6, SMatrix, SVector, Vector3, Vector6};
use rayon::prelude::*;

use super::ekf::{ekf_propagate, ekf_update, log_gaussian_likelihood, symmetrize};
use super::EstimationError;
use crate::model::{Integrator, JointInput, RobotParams, WorkingMode};

const M: usize = WorkingMode::COUNT;

/// Mixed priors `(x0_j, P0_j)` and the normalisers `c_j = sum_i w_i p_ij`.
pub type Mixed<const N: usize> = (Vec<SVector<f64, N>>, Vec<SMatrix<f64, N, N>>, Vec<f64>);

/// Interaction step: each filter restarts from a weighted blend of all
/// posteriors, `w(i|j) = w_i p_ij / c_j`.
pub fn imm_mix<const N: usize>(
    weights: &[f64],
    transition: &DMatrix<f64>,
    means: &[SVector<f64, N>],
    covs: &[SMatrix<f64, N, N>],
) -> Result<Mixed<N>, EstimationError> {
    let m = weights.len();
    let mut xs = Vec::with_capacity(m);
    let mut ps = Vec::with_capacity(m);
    let mut cbar = Vec::with_capacity(m);
    for j in 0..m {
        let c: f64 = (0..m).map(|i| weights[i] * transition[(i, j)]).sum();
        if !(c >= 1e-300) {
            return Err(EstimationError::NumericalDegeneracy);
        }
        let mu: Vec<f64> = (0..m).map(|i| weights[i] * transition[(i, j)] / c).collect();
        let x0: SVector<f64, N> = (0..m).fold(SVector::zeros(), |acc, i| acc + means[i] * mu[i]);
        let p0 = (0..m).fold(SMatrix::<f64, N, N>::zeros(), |acc, i| {
            let d = means[i] - x0;
            acc + (d * d.transpose() + covs[i]) * mu[i]
        });
        xs.push(x0);
        ps.push(symmetrize(&p0));
        cbar.push(c);
    }
    Ok((xs, ps, cbar))
}

/// Clamps every weight to at least `floor` while keeping the sum at one.
///
/// Entries that would fall below the floor are pinned to it and the rest
/// rescaled, repeating until no further entry drops under.
pub fn apply_weight_floor(weights: &mut [f64], floor: f64) {
    let mut pinned = vec![false; weights.len()];
    loop {
        let n_pinned = pinned.iter().filter(|&&p| p).count();
        let free_mass = 1.0 - floor * n_pinned as f64;
        let free_sum: f64 = weights.iter().zip(&pinned).filter(|(_, &p)| !p).map(|(w, _)| *w).sum();
        let mut changed = false;
        for (w, p) in weights.iter_mut().zip(pinned.iter_mut()) {
            if *p {
                *w = floor;
                continue;
            }
            if free_sum > 0.0 {
                *w *= free_mass / free_sum;
            }
            if *w < floor {
                *p = true;
                *w = floor;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Outcome of a mode-probability update.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightUpdate {
    pub weights: Vec<f64>,
    /// Every likelihood vanished and the weights were reset to uniform.
    pub all_zero: bool,
}

/// `w_j <- w_j L_j`, normalised and floored, from log-likelihoods.
pub fn imm_weight_update_log(weights: &[f64], log_likelihoods: &[f64], floor: f64) -> WeightUpdate {
    let logs: Vec<f64> = weights
        .iter()
        .zip(log_likelihoods)
        .map(|(w, l)| if *w > 0.0 { w.ln() + l } else { f64::NEG_INFINITY })
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        let n = weights.len();
        return WeightUpdate {
            weights: vec![1.0 / n as f64; n],
            all_zero: true,
        };
    }
    let mut w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let sum: f64 = w.iter().sum();
    for v in &mut w {
        *v /= sum;
    }
    apply_weight_floor(&mut w, floor);
    WeightUpdate {
        weights: w,
        all_zero: false,
    }
}

/// Same update from plain likelihood values.
pub fn imm_weight_update(weights: &[f64], likelihoods: &[f64], floor: f64) -> WeightUpdate {
    let logs: Vec<f64> = likelihoods.iter().map(|l| l.ln()).collect();
    imm_weight_update_log(weights, &logs, floor)
}

/// Moment-matched combination of the mode posteriors.
pub fn imm_combine<const N: usize>(
    weights: &[f64],
    means: &[SVector<f64, N>],
    covs: &[SMatrix<f64, N, N>],
) -> (SVector<f64, N>, SMatrix<f64, N, N>) {
    let x = weights
        .iter()
        .zip(means)
        .fold(SVector::zeros(), |acc, (w, m)| acc + m * *w);
    let p = weights
        .iter()
        .zip(means.iter().zip(covs))
        .fold(SMatrix::zeros(), |acc, (w, (m, c))| {
            let d = m - x;
            acc + (d * d.transpose() + c) * *w
        });
    (x, symmetrize(&p))
}

/// Default Markov matrix following the cable-loss graph: single losses
/// from the healthy mode, then the second loss that leaves a vertical
/// cable pair. Impossible transitions keep a tiny probability.
pub fn default_transition() -> DMatrix<f64> {
    let mut pi = DMatrix::from_element(M, M, 1e-6);
    let edge = |from: usize, to: usize| -> Option<f64> {
        match (from, to) {
            (1, 2..=5) => Some(0.01),
            (2 | 4, 6) | (3 | 5, 7) => Some(0.02),
            _ => None,
        }
    };
    for i in 0..M {
        let mut off = 0.0;
        for j in 0..M {
            if i == j {
                continue;
            }
            if let Some(p) = edge(i + 1, j + 1) {
                pi[(i, j)] = p;
            }
            off += pi[(i, j)];
        }
        pi[(i, i)] = (1.0 - off).max(0.0);
        let s: f64 = pi.row(i).sum();
        for j in 0..M {
            pi[(i, j)] /= s;
        }
    }
    pi
}

/// One extended Kalman filter of the bank.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeFilter {
    pub mode: WorkingMode,
    pub x: Vector6<f64>,
    pub p: Matrix6<f64>,
}

#[derive(Clone, Debug)]
pub struct ImmBank {
    pub filters: Vec<ModeFilter>,
    pub weights: [f64; M],
    pub transition: DMatrix<f64>,
    pub weight_floor: f64,
    /// Continuous-time process noise; scaled by `dt` at every step.
    pub q: Matrix6<f64>,
    pub r: Matrix3<f64>,
    /// Discretisation of the prediction; should match the plant.
    pub integrator: Integrator,
}

impl ImmBank {
    /// All filters start at `x0` with covariance `p0`; the healthy mode
    /// holds all weight except the floor of the others.
    pub fn new(
        x0: Vector6<f64>,
        p0: Matrix6<f64>,
        transition: DMatrix<f64>,
        weight_floor: f64,
        q: Matrix6<f64>,
        r: Matrix3<f64>,
    ) -> Self {
        let mut weights = [weight_floor; M];
        weights[0] = 1.0 - weight_floor * (M - 1) as f64;
        Self {
            filters: WorkingMode::all()
                .map(|mode| ModeFilter { mode, x: x0, p: p0 })
                .collect(),
            weights,
            transition,
            weight_floor,
            q,
            r,
            integrator: Integrator::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImmOutput {
    pub x: Vector6<f64>,
    pub p: Matrix6<f64>,
    pub weights: [f64; M],
    pub dominant: WorkingMode,
    pub all_zero_likelihood: bool,
}

/// Mode with the largest weight, ties to the lowest id.
pub fn dominant(weights: &[f64]) -> WorkingMode {
    let mut best = 0;
    for (j, &w) in weights.iter().enumerate() {
        if w > weights[best] {
            best = j;
        }
    }
    WorkingMode::from_index(best)
}

/// Mix, per-mode predict and update, weight update and combination.
///
/// A mode whose model or innovation fails gets zero likelihood and keeps
/// its mixed prior.
pub fn imm_step(
    bank: &mut ImmBank,
    params: &RobotParams,
    input: &JointInput,
    y: &Vector3<f64>,
    dt: f64,
) -> Result<ImmOutput, EstimationError> {
    let means: Vec<Vector6<f64>> = bank.filters.iter().map(|f| f.x).collect();
    let covs: Vec<Matrix6<f64>> = bank.filters.iter().map(|f| f.p).collect();
    let (x0, p0, _) = imm_mix(&bank.weights, &bank.transition, &means, &covs)?;
    let q_k = bank.q * dt;
    let r = bank.r;

    let results: Vec<(Vector6<f64>, Matrix6<f64>, f64)> = bank
        .filters
        .par_iter()
        .enumerate()
        .map(|(j, f)| {
            let run = || -> Result<_, EstimationError> {
                let (xp, pp) = ekf_propagate(params, f.mode, &x0[j], &p0[j], input, &q_k, dt, bank.integrator)?;
                let u = ekf_update(&xp, &pp, y, &r)?;
                let ll = log_gaussian_likelihood(&u.innovation, &u.innovation_cov)?;
                Ok((u.x, u.p, ll))
            };
            run().unwrap_or((x0[j], p0[j], f64::NEG_INFINITY))
        })
        .collect();

    let logs: Vec<f64> = results.iter().map(|r| r.2).collect();
    let upd = imm_weight_update_log(&bank.weights, &logs, bank.weight_floor);
    for (f, (x, p, _)) in bank.filters.iter_mut().zip(&results) {
        f.x = *x;
        f.p = *p;
    }
    bank.weights.copy_from_slice(&upd.weights);

    let xs: Vec<Vector6<f64>> = bank.filters.iter().map(|f| f.x).collect();
    let ps: Vec<Matrix6<f64>> = bank.filters.iter().map(|f| f.p).collect();
    let (x, p) = imm_combine(&bank.weights, &xs, &ps);
    Ok(ImmOutput {
        x,
        p,
        weights: bank.weights,
        dominant: dominant(&bank.weights),
        all_zero_likelihood: upd.all_zero,
    })
}
