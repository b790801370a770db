use nalgebra::{Matrix6, Vector3, Vector4, Vector6};

use super::plant::{
    diag3, diag6, measure, noise_stream, plant_step, GaussianNoise, MEASUREMENT_STREAM, PROCESS_STREAM,
};
use super::scenario::Scenario;
use super::SimError;
use crate::control::{
    bank_step, flags, optimal_sliders, tension_distribution, BankConfig, ControllerBankState, SliderSearch,
};
use crate::estimation::{imm_step, ImmBank};
use crate::model::{
    cable_geometry, cable_tensions, inject_failure, CableHealth, JointInput, PlatformState, RobotParams, WorkingMode,
};

/// Everything recorded at one plant tick.
#[derive(Clone, Debug, PartialEq)]
pub struct LogRecord {
    pub t: f64,
    pub state: PlatformState,
    pub measurement: Vector3<f64>,
    pub estimate: Vector6<f64>,
    pub weights: [f64; WorkingMode::COUNT],
    pub dominant_mode: u8,
    /// Registered mode of the true cable set, 0 if the set is unregistered.
    pub true_mode: u8,
    /// Joint input applied during the step that ended at `t`.
    pub input: JointInput,
    pub tensions: Vector4<f64>,
    pub reference: Vector3<f64>,
    pub reference_index: usize,
    /// Planar distance between reference and true pose.
    pub err_norm: f64,
    pub flags: u32,
}

/// Equilibrium input holding `pose` with the best-conditioned sliders and
/// minimal tensions on all four cables.
pub fn initial_input(params: &RobotParams, pose: &Vector3<f64>) -> Result<JointInput, SimError> {
    let (sliders, _) = optimal_sliders(
        params,
        pose,
        &params.mid_sliders(),
        WorkingMode::HEALTHY,
        &SliderSearch::default(),
    )?;
    let geom = cable_geometry(params, pose, &sliders, [true; 4])?;
    let p = nalgebra::DMatrix::from_fn(3, 4, |r, c| geom.column(c)[r]);
    let tau = tension_distribution(&p, params.tau_min)?;
    let k0 = params.stiffness();
    let spools = Vector4::from_fn(|i, _| geom.lengths[i] - tau[i] * geom.lengths[i] / k0[i]);
    Ok(JointInput::new(sliders, spools))
}

/// Filter bank as the closed loop builds it: every mode at rest at `pose0`,
/// noise variances floored at `imm.variance_floor`.
pub fn estimator_bank(sc: &Scenario, pose0: &Vector3<f64>) -> ImmBank {
    let mut x0 = Vector6::zeros();
    x0.fixed_rows_mut::<3>(0).copy_from(pose0);
    let mut imm = ImmBank::new(
        x0,
        Matrix6::from_diagonal(&Vector6::from(sc.imm.initial_covariance)),
        sc.imm.transition_matrix(),
        sc.imm.weight_floor,
        diag6(&sc.noise.process.map(|v| v.max(sc.imm.variance_floor))),
        diag3(&sc.noise.measurement.map(|v| v.max(sc.imm.variance_floor))),
    );
    imm.integrator = sc.run.integrator;
    imm
}

/// Thread cap read from `CDPR_SIM_THREADS`, if set to a number.
pub fn env_threads() -> Option<usize> {
    std::env::var("CDPR_SIM_THREADS").ok()?.trim().parse().ok()
}

/// Runs the closed loop for the whole scenario and returns one record per
/// plant tick.
///
/// `CDPR_SIM_THREADS` caps the threads used by the filter and controller
/// banks; results do not depend on it.
pub fn run_scenario(scenario: &Scenario) -> Result<Vec<LogRecord>, SimError> {
    run_scenario_with_threads(scenario, env_threads())
}

/// As [`run_scenario`] with an explicit thread cap; `None` uses the global
/// pool.
pub fn run_scenario_with_threads(scenario: &Scenario, threads: Option<usize>) -> Result<Vec<LogRecord>, SimError> {
    scenario.validate()?;
    let pool = threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok());
    match pool {
        Some(pool) => pool.install(|| run_loop(scenario)),
        None => run_loop(scenario),
    }
}

fn run_loop(sc: &Scenario) -> Result<Vec<LogRecord>, SimError> {
    let params = &sc.robot;
    let run = &sc.run;
    let dt = 1.0 / run.plant_hz as f64;
    let per_ctrl = run.ticks_per_control();
    let dt_ctrl = per_ctrl as f64 * dt;
    let traj = sc.trajectory.build();
    let step_len = sc.trajectory.speed() * dt_ctrl;
    let reference = |i: usize| traj.at(step_len * i as f64);

    let pose0 = reference(0);
    let mut q = initial_input(params, &pose0)?;
    let mut state = PlatformState::at_rest(pose0);
    let mut health = CableHealth::with_events(sc.failures.clone());

    let q_cov = diag6(&sc.noise.process);
    let r_cov = diag3(&sc.noise.measurement);
    let process = GaussianNoise::new(&q_cov);
    let meas = GaussianNoise::new(&r_cov);
    let mut rng_p = noise_stream(run.seed, PROCESS_STREAM);
    let mut rng_m = noise_stream(run.seed, MEASUREMENT_STREAM);

    let mut imm = estimator_bank(sc, &pose0);
    let mut bank = ControllerBankState::new(pose0, q);
    let config = BankConfig {
        gains: sc.gains.clone(),
        recovery: run.recovery.clone(),
        search: SliderSearch::default(),
        lost_spools: run.lost_spools,
        dt: dt_ctrl,
    };

    let n = run.steps();
    let mut log = Vec::with_capacity(n);
    let mut x_ref = pose0;
    let mut ref_index = 0;
    for k in 1..=n {
        let t = k as f64 * dt;
        health = inject_failure(&health, t);
        state = plant_step(params, &state, &q, &health, &process, dt, run.integrator, &mut rng_p)?;
        let y = measure(&state, &meas, &mut rng_m);
        let est = imm_step(&mut imm, params, &q, &y, dt)?;

        let applied = q;
        let mut tick_flags = if est.all_zero_likelihood {
            flags::ZERO_LIKELIHOOD
        } else {
            0
        };
        if k % per_ctrl == 0 {
            let out = bank_step(params, &mut bank, &config, &est.weights, t, reference);
            q = out.input;
            ref_index = out.reference_index;
            x_ref = reference(ref_index);
            tick_flags |= out.flags;
        }

        let tensions = cable_tensions(params, &state.pose, &applied.sliders, &applied.spools, &health)
            .unwrap_or_else(|_| Vector4::repeat(f64::NAN));
        let d = x_ref - state.pose;
        log.push(LogRecord {
            t,
            state,
            measurement: y,
            estimate: est.x,
            weights: est.weights,
            dominant_mode: est.dominant.id(),
            true_mode: health.true_mode().map_or(0, WorkingMode::id),
            input: applied,
            tensions,
            reference: x_ref,
            reference_index: ref_index,
            err_norm: (d.x * d.x + d.y * d.y).sqrt(),
            flags: tick_flags,
        });
    }
    Ok(log)
}
