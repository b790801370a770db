use nalgebra::{Vector3, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kappa::{controlled_rows, reduce_rows};
use super::pd::{pd_step, Gains, TrackingState};
use super::recovery::{RecoveryPolicy, RecoveryState};
use super::sliders::{optimize_sliders, SliderSearch};
use super::tension::{compute_joint_angles, tension_distribution};
use super::{flags, ControlError};
use crate::model::{
    cable_geometry, forward_kinematics, CableHealth, JointInput, RobotParams, WorkingMode, MIN_CABLE_LENGTH,
};

/// Output of one per-mode controller.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeCandidate {
    pub input: JointInput,
    /// Static pose the previous mixed input settles to under this mode.
    pub x_fk: Option<Vector3<f64>>,
    pub flags: u32,
}

fn hold(q_prev: &JointInput, x_fk: Option<Vector3<f64>>, flag: u32) -> ModeCandidate {
    ModeCandidate {
        input: *q_prev,
        x_fk,
        flags: flag,
    }
}

fn error_flag(e: &ControlError) -> u32 {
    match e {
        ControlError::NoFeasibleSliders => flags::NO_FEASIBLE_SLIDERS,
        _ => flags::INFEASIBLE,
    }
}

/// What a mode controller commands to the spools of cables it assumes lost.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LostSpoolPolicy {
    /// Keep the previous command.
    Hold,
    /// Keep the spool where an intact cable would carry `tau_min` at the
    /// commanded pose. A slack spool would make "lost" and "intact but
    /// slack" indistinguishable to the estimator.
    #[default]
    Pretension,
}

/// One tick of the controller that assumes `mode` is the true mode.
///
/// Any failing stage makes the mode return `q_prev` unchanged with the
/// corresponding flag set.
#[allow(clippy::too_many_arguments)]
pub fn mode_controller_step(
    params: &RobotParams,
    mode: WorkingMode,
    q_prev: &JointInput,
    x_ref: &Vector3<f64>,
    tracking: &mut TrackingState,
    gains: &Gains,
    dt: f64,
    search: &SliderSearch,
    lost_spools: LostSpoolPolicy,
) -> ModeCandidate {
    let health = CableHealth::for_mode(mode);
    let fk = forward_kinematics(params, q_prev, &health, &tracking.last_command)
        .or_else(|_| forward_kinematics(params, q_prev, &health, x_ref));
    let x_fk = match fk {
        Ok(sol) => sol.pose,
        Err(_) => return hold(q_prev, None, flags::FK_NO_CONVERGENCE),
    };
    let x_next = pd_step(x_ref, &x_fk, tracking, gains, dt);

    let sliders = match optimize_sliders(params, &x_next, &q_prev.sliders, mode, dt, search) {
        Ok(s) => s,
        Err(e) => return hold(q_prev, Some(x_fk), error_flag(&e)),
    };
    let surviving = mode.surviving();
    let geom = match cable_geometry(params, &x_next, &sliders, surviving) {
        Ok(g) => g,
        Err(_) => return hold(q_prev, Some(x_fk), flags::INFEASIBLE),
    };
    let cables = mode.surviving_cables();
    let full = nalgebra::DMatrix::from_fn(3, cables.len(), |r, c| geom.column(cables[c])[r]);
    let p = reduce_rows(&full, controlled_rows(mode.motion_model()));
    let tau_s = match tension_distribution(&p, params.tau_min) {
        Ok(t) => t,
        Err(e) => return hold(q_prev, Some(x_fk), error_flag(&e)),
    };
    let mut tau = Vector4::zeros();
    for (k, &c) in cables.iter().enumerate() {
        tau[c] = tau_s[k];
    }
    let k0 = params.stiffness();
    let k = Vector4::from_fn(|i, _| k0[i] / geom.lengths[i].max(f64::MIN_POSITIVE));
    let mut spools = compute_joint_angles(&geom.lengths, &k, &tau, surviving, &q_prev.spools);
    if lost_spools == LostSpoolPolicy::Pretension {
        for i in (0..4).filter(|&i| !surviving[i] && geom.lengths[i] >= MIN_CABLE_LENGTH) {
            spools[i] = geom.lengths[i] - params.tau_min / k[i];
        }
    }
    ModeCandidate {
        input: JointInput::new(sliders, spools),
        x_fk: Some(x_fk),
        flags: 0,
    }
}

/// Convex combination of candidate inputs, sliders re-clamped to the rails.
pub fn mix_inputs(params: &RobotParams, candidates: &[JointInput], weights: &[f64]) -> JointInput {
    let mut sliders = Vector4::zeros();
    let mut spools = Vector4::zeros();
    for (q, &w) in candidates.iter().zip(weights) {
        sliders += q.sliders * w;
        spools += q.spools * w;
    }
    JointInput::new(params.clamp_sliders(&sliders), spools)
}

/// Memory of the whole controller bank between ticks.
#[derive(Clone, Debug)]
pub struct ControllerBankState {
    pub tracking: Vec<TrackingState>,
    pub last_input: JointInput,
    pub recovery: RecoveryState,
    /// Planar tracking error of the dominant mode at the previous tick.
    pub last_error: f64,
}

impl ControllerBankState {
    pub fn new(pose: Vector3<f64>, input: JointInput) -> Self {
        Self {
            tracking: (0..WorkingMode::COUNT).map(|_| TrackingState::new(pose)).collect(),
            last_input: input,
            recovery: RecoveryState::new(WorkingMode::HEALTHY),
            last_error: 0.0,
        }
    }
}

/// Settings shared by every controller tick.
#[derive(Clone, Debug)]
pub struct BankConfig {
    pub gains: Gains,
    pub recovery: RecoveryPolicy,
    pub search: SliderSearch,
    pub lost_spools: LostSpoolPolicy,
    pub dt: f64,
}

#[derive(Clone, Debug)]
pub struct BankOutput {
    pub input: JointInput,
    pub candidates: Vec<ModeCandidate>,
    pub reference_index: usize,
    pub flags: u32,
}

/// One controller tick: moves the reference cursor, runs the seven mode
/// controllers from the previous mixed input and mixes them by `weights`.
///
/// `reference` maps a cursor index to a pose. Mode controllers run in
/// parallel; results are collected in mode order so the mix is
/// deterministic.
pub fn bank_step(
    params: &RobotParams,
    state: &mut ControllerBankState,
    config: &BankConfig,
    weights: &[f64; WorkingMode::COUNT],
    t: f64,
    reference: impl Fn(usize) -> Vector3<f64>,
) -> BankOutput {
    let dominant = dominant_mode(weights);
    let ev = state.recovery.update(
        &config.recovery,
        dominant,
        weights[dominant.index()],
        state.last_error,
        t,
    );
    let index = state.recovery.index();
    let x_ref = reference(index);
    let q_prev = state.last_input;

    let candidates: Vec<ModeCandidate> = state
        .tracking
        .par_iter_mut()
        .enumerate()
        .map(|(j, tracking)| {
            mode_controller_step(
                params,
                WorkingMode::from_index(j),
                &q_prev,
                &x_ref,
                tracking,
                &config.gains,
                config.dt,
                &config.search,
                config.lost_spools,
            )
        })
        .collect();

    let inputs: Vec<JointInput> = candidates.iter().map(|c| c.input).collect();
    let input = mix_inputs(params, &inputs, weights);
    state.last_input = input;
    let dom = &candidates[dominant.index()];
    if let Some(x) = dom.x_fk {
        state.last_error = ((x_ref.x - x.x).powi(2) + (x_ref.y - x.y).powi(2)).sqrt();
    }

    let mut f = dom.flags;
    if ev.holding {
        f |= flags::RECOVERY_HOLD;
    }
    if ev.stalled {
        f |= flags::RECOVERY_STALL;
    }
    BankOutput {
        input,
        candidates,
        reference_index: index,
        flags: f,
    }
}

/// Mode with the largest weight, ties going to the lowest id.
pub fn dominant_mode(weights: &[f64]) -> WorkingMode {
    let mut best = 0;
    for (j, &w) in weights.iter().enumerate() {
        if w > weights[best] {
            best = j;
        }
    }
    WorkingMode::from_index(best)
}
