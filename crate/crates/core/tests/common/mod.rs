//! Independent oracles and closed-loop checks shared by the integration
//! tests. Nothing here calls the library code it is used to check.
#![allow(dead_code, clippy::needless_range_loop)]

use cdpr::control::{optimal_sliders, tension_distribution, SliderSearch};
use cdpr::estimation::imm_step;
use cdpr::estimation::linearize;
use cdpr::model::{forward_kinematics, inverse_kinematics, CableHealth, JointInput, RobotParams, WorkingMode};
use cdpr::sim::{estimator_bank, initial_input, LogRecord, Scenario};
use nalgebra::{DMatrix, Matrix3, Matrix6, SymmetricEigen, Vector3, Vector4, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Pose in the central part of the frame with a small rotation.
pub fn random_pose(r: &mut ChaCha8Rng) -> Vector3<f64> {
    Vector3::new(
        r.random_range(0.5..1.5),
        r.random_range(0.4..1.1),
        r.random_range(-0.15..0.15),
    )
}

pub fn random_sliders(p: &RobotParams, r: &mut ChaCha8Rng) -> Vector4<f64> {
    Vector4::from_fn(|i, _| {
        let [lo, hi] = p.rails[i].interval;
        r.random_range(lo..hi)
    })
}

/// Taut input near `pose`: the equilibrium input of a slightly shifted pose
/// with spools perturbed by up to 2 mm.
pub fn taut_input(p: &RobotParams, pose: &Vector3<f64>, r: &mut ChaCha8Rng) -> JointInput {
    let shifted = pose + Vector3::new(r.random_range(-0.01..0.01), r.random_range(-0.01..0.01), 0.0);
    let mut q = initial_input(p, &shifted).unwrap();
    for i in 0..4 {
        q.spools[i] += r.random_range(-0.002..0.002);
    }
    q
}

pub fn anchor(p: &RobotParams, cable: usize, slider: f64) -> [f64; 2] {
    let rail = &p.rails[cable];
    [
        rail.origin[0] + slider * rail.direction[0],
        rail.origin[1] + slider * rail.direction[1],
    ]
}

/// World offset of attachment `cable` at rotation `phi`.
pub fn arm(p: &RobotParams, cable: usize, phi: f64) -> [f64; 2] {
    let [ax, ay] = p.attachments[cable];
    let (s, c) = phi.sin_cos();
    [c * ax - s * ay, s * ax + c * ay]
}

/// Point-to-point cable lengths.
pub fn lengths_oracle(p: &RobotParams, pose: &Vector3<f64>, sliders: &Vector4<f64>) -> [f64; 4] {
    std::array::from_fn(|i| {
        let [rx, ry] = arm(p, i, pose.z);
        let [bx, by] = anchor(p, i, sliders[i]);
        ((bx - pose.x - rx).powi(2) + (by - pose.y - ry).powi(2)).sqrt()
    })
}

/// Wrench columns `[u; r x u]` built from raw geometry.
pub fn columns_oracle(p: &RobotParams, pose: &Vector3<f64>, sliders: &Vector4<f64>) -> [[f64; 3]; 4] {
    std::array::from_fn(|i| {
        let [rx, ry] = arm(p, i, pose.z);
        let [bx, by] = anchor(p, i, sliders[i]);
        let (dx, dy) = (bx - pose.x - rx, by - pose.y - ry);
        let l = (dx * dx + dy * dy).sqrt();
        let (ux, uy) = (dx / l, dy / l);
        [ux, uy, rx * uy - ry * ux]
    })
}

/// Acceleration by summing cable forces and moments one at a time.
pub fn newton_euler(p: &RobotParams, x: &Vector6<f64>, q: &JointInput, multipliers: &[f64; 4]) -> Vector6<f64> {
    let pose = Vector3::new(x[0], x[1], x[2]);
    let (mut fx, mut fy, mut m) = (0.0, 0.0, 0.0);
    for i in 0..4 {
        let [rx, ry] = arm(p, i, pose.z);
        let [bx, by] = anchor(p, i, q.sliders[i]);
        let (dx, dy) = (bx - pose.x - rx, by - pose.y - ry);
        let l = (dx * dx + dy * dy).sqrt();
        let tau = multipliers[i] * p.specific_stiffness[i] / l * (l - q.spools[i]);
        if tau <= 0.0 {
            continue;
        }
        let (gx, gy) = (tau * dx / l, tau * dy / l);
        fx += gx;
        fy += gy;
        m += rx * gy - ry * gx;
    }
    Vector6::new(
        x[3],
        x[4],
        x[5],
        (fx - p.damping[0] * x[3]) / p.mass,
        (fy - p.damping[1] * x[4]) / p.mass,
        (m - p.damping[2] * x[5]) / p.inertia,
    )
}

/// Cable energy whose length derivative is the tension `k0 (l - theta) / l`.
fn energy_oracle(p: &RobotParams, pose: &Vector3<f64>, q: &JointInput) -> f64 {
    let l = lengths_oracle(p, pose, &q.sliders);
    (0..4)
        .map(|i| {
            let th = q.spools[i];
            if l[i] <= th {
                0.0
            } else {
                p.specific_stiffness[i] * (l[i] - th - th * (l[i] / th).ln())
            }
        })
        .sum()
}

/// Largest pose error of forward kinematics against poses whose input was
/// built from inverse kinematics and equilibrium tensions, over `n` cases.
pub fn fk_round_trip_error(n: usize, seed: u64) -> f64 {
    let p = RobotParams::default();
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < n {
        let pose = random_pose(&mut r);
        let sliders = random_sliders(&p, &mut r);
        let cols = columns_oracle(&p, &pose, &sliders);
        let pm = DMatrix::from_fn(3, 4, |row, c| cols[c][row]);
        let Ok(tau) = tension_distribution(&pm, p.tau_min) else {
            continue;
        };
        // Tensions near k0 would need spools of zero or negative length.
        if (0..4).any(|i| tau[i] > 0.5 * p.specific_stiffness[i]) {
            continue;
        }
        let l = inverse_kinematics(&p, &pose, &sliders).unwrap();
        let spools = Vector4::from_fn(|i, _| l[i] - tau[i] * l[i] / p.specific_stiffness[i]);
        let q = JointInput::new(sliders, spools);
        let guess = pose + Vector3::new(0.01, -0.01, 0.02);
        let sol = forward_kinematics(&p, &q, &CableHealth::healthy(), &guess).unwrap();
        worst = worst.max((sol.pose - pose).amax());
        done += 1;
    }
    worst
}

/// Largest distance, in grid pitches, between forward kinematics and the
/// minimum of the cable energy over a dense pose grid.
pub fn fk_energy_grid_error(n: usize, seed: u64) -> f64 {
    let p = RobotParams::default();
    let mut r = rng(seed);
    let (half_xy, pitch_xy): (f64, f64) = (0.02, 5e-4);
    let (half_phi, pitch_phi): (f64, f64) = (0.05, 1e-3);
    let nxy = (2.0 * half_xy / pitch_xy).round() as i32;
    let nphi = (2.0 * half_phi / pitch_phi).round() as i32;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let centre = random_pose(&mut r);
        let q = taut_input(&p, &centre, &mut r);
        let mut best = (f64::INFINITY, centre);
        for i in 0..=nxy {
            for j in 0..=nxy {
                for k in 0..=nphi {
                    let pose = centre
                        + Vector3::new(
                            -half_xy + i as f64 * pitch_xy,
                            -half_xy + j as f64 * pitch_xy,
                            -half_phi + k as f64 * pitch_phi,
                        );
                    let e = energy_oracle(&p, &pose, &q);
                    if e < best.0 {
                        best = (e, pose);
                    }
                }
            }
        }
        let sol = forward_kinematics(&p, &q, &CableHealth::healthy(), &centre).unwrap();
        let d = sol.pose - best.1;
        worst = worst.max(
            (d.x.abs() / pitch_xy)
                .max(d.y.abs() / pitch_xy)
                .max(d.z.abs() / pitch_phi),
        );
    }
    worst
}

/// Largest relative error of `F delta` against a central directional
/// difference of the force-summation oracle, over random states and modes.
pub fn jacobian_directional_error(n: usize, seed: u64) -> f64 {
    let p = RobotParams::default();
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for c in 0..n {
        let mode = WorkingMode::from_index(c % WorkingMode::COUNT);
        let pose = random_pose(&mut r);
        let q = taut_input(&p, &pose, &mut r);
        let x = Vector6::new(
            pose.x,
            pose.y,
            pose.z,
            r.random_range(-0.1..0.1),
            r.random_range(-0.1..0.1),
            r.random_range(-0.5..0.5),
        );
        let (f, _) = linearize(&p, mode, &x, &q).unwrap();
        let s = CableHealth::for_mode(mode).multipliers;
        let mut delta = Vector6::from_fn(|_, _| r.random_range(-1.0..1.0));
        delta *= 1e-5 / delta.norm();
        let diff = (newton_euler(&p, &(x + delta), &q, &s) - newton_euler(&p, &(x - delta), &q, &s)) * 0.5;
        worst = worst.max((f * delta - diff).norm() / diff.norm());
    }
    worst
}

/// Worst residual `|P tau|` and worst `tau_min - min tau` of the tension
/// solver on pulling maps of every mode at optimal sliders.
pub fn tension_residuals(n: usize, seed: u64) -> (f64, f64) {
    let p = RobotParams::default();
    let mut r = rng(seed);
    let (mut res, mut short): (f64, f64) = (0.0, f64::NEG_INFINITY);
    let mut c = 0;
    while c < n {
        let mode = WorkingMode::from_index(c % WorkingMode::COUNT);
        let pose = random_pose(&mut r);
        let sliders = random_sliders(&p, &mut r);
        let rows: &[usize] = match mode.surviving_count() {
            4 => &[0, 1, 2],
            3 => &[0, 1],
            _ => &[1],
        };
        let sliders = if rows.len() == 1 {
            sliders
        } else {
            // Poses near the corner of a lost cable admit no tensions at all.
            match optimal_sliders(&p, &pose, &sliders, mode, &SliderSearch::default()) {
                Ok((s, _)) => s,
                Err(_) => continue,
            }
        };
        c += 1;
        let cols = columns_oracle(&p, &pose, &sliders);
        let cables = mode.surviving_cables();
        let pm = DMatrix::from_fn(rows.len(), cables.len(), |i, j| cols[cables[j]][rows[i]]);
        let tau = tension_distribution(&pm, p.tau_min).unwrap();
        res = res.max((&pm * &tau).norm());
        short = short.max(p.tau_min - tau.min());
    }
    (res, short)
}

/// Null-vector conditioning of the force rows of three cables, computed as
/// the cross product of the two force rows.
fn kappa_three(u: [[f64; 2]; 3]) -> f64 {
    let z = [
        u[1][0] * u[2][1] - u[2][0] * u[1][1],
        u[2][0] * u[0][1] - u[0][0] * u[2][1],
        u[0][0] * u[1][1] - u[1][0] * u[0][1],
    ];
    if !(z.iter().all(|&v| v > 0.0) || z.iter().all(|&v| v < 0.0)) {
        return 0.0;
    }
    let a = z.map(f64::abs);
    a.iter().cloned().fold(f64::INFINITY, f64::min) / a.iter().cloned().fold(0.0, f64::max)
}

/// Null-vector conditioning of a full 3 x 4 wrench matrix by solving for the
/// first three entries with the fourth fixed to one.
fn kappa_four(cols: [[f64; 3]; 4]) -> f64 {
    let a = Matrix3::from_fn(|r, c| cols[c][r]);
    let b = -Vector3::from(cols[3]);
    let Some(z) = a.lu().solve(&b) else { return 0.0 };
    let z = [z[0], z[1], z[2], 1.0];
    if !z.iter().all(|&v| v > 0.0) {
        return 0.0;
    }
    z.iter().cloned().fold(f64::INFINITY, f64::min) / z.iter().cloned().fold(0.0, f64::max)
}

pub struct SliderOracleCase {
    pub mode: WorkingMode,
    pub kappa_opt: f64,
    pub kappa_grid: f64,
    /// Largest slider distance to the grid optimum, in grid pitches.
    pub cells: f64,
    pub pose: Vector3<f64>,
    /// Grid optimum, surviving sliders only.
    pub grid_best: Vec<f64>,
}

impl SliderOracleCase {
    /// The optimiser is as good as the grid, or lands in the grid optimum's
    /// cell.
    pub fn ok(&self) -> bool {
        self.kappa_opt >= self.kappa_grid - 1e-9 || self.cells <= 1.0
    }
}

fn rail_grid(p: &RobotParams, cable: usize, pitch: f64) -> Vec<f64> {
    let [lo, hi] = p.rails[cable].interval;
    let n = ((hi - lo) / pitch).round() as usize;
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

/// Single-loss modes on an exhaustive grid of the three surviving sliders.
pub fn slider_grid_case(
    p: &RobotParams,
    pose: &Vector3<f64>,
    current: &Vector4<f64>,
    mode: WorkingMode,
    pitch: f64,
) -> SliderOracleCase {
    let cables = mode.surviving_cables();
    assert_eq!(cables.len(), 3);
    let axes: Vec<Vec<f64>> = cables.iter().map(|&c| rail_grid(p, c, pitch)).collect();
    let units: Vec<Vec<[f64; 2]>> = cables
        .iter()
        .zip(&axes)
        .map(|(&c, axis)| {
            let [rx, ry] = arm(p, c, pose.z);
            axis.iter()
                .map(|&s| {
                    let [bx, by] = anchor(p, c, s);
                    let (dx, dy) = (bx - pose.x - rx, by - pose.y - ry);
                    let l = (dx * dx + dy * dy).sqrt();
                    [dx / l, dy / l]
                })
                .collect()
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, [0usize; 3]);
    for i in 0..axes[0].len() {
        for j in 0..axes[1].len() {
            for k in 0..axes[2].len() {
                let kap = kappa_three([units[0][i], units[1][j], units[2][k]]);
                if kap > best.0 {
                    best = (kap, [i, j, k]);
                }
            }
        }
    }
    // An infeasible pose counts as kappa zero everywhere.
    let (opt, kappa_opt) =
        optimal_sliders(p, pose, current, mode, &SliderSearch::default()).unwrap_or((Vector4::repeat(f64::NAN), 0.0));
    let cells = (0..3)
        .map(|m| (opt[cables[m]] - axes[m][best.1[m]]).abs() / pitch)
        .fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
    SliderOracleCase {
        mode,
        kappa_opt,
        kappa_grid: best.0,
        cells,
        pose: *pose,
        grid_best: (0..3).map(|m| axes[m][best.1[m]]).collect(),
    }
}

/// Healthy mode on an exhaustive grid of all four sliders.
pub fn slider_grid_case_healthy(
    p: &RobotParams,
    pose: &Vector3<f64>,
    current: &Vector4<f64>,
    pitch: f64,
) -> SliderOracleCase {
    let axes: Vec<Vec<f64>> = (0..4).map(|c| rail_grid(p, c, pitch)).collect();
    let cols: Vec<Vec<[f64; 3]>> = (0..4)
        .map(|c| {
            axes[c]
                .iter()
                .map(|&s| {
                    let mut sl = *current;
                    sl[c] = s;
                    columns_oracle(p, pose, &sl)[c]
                })
                .collect()
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, [0usize; 4]);
    for a in 0..axes[0].len() {
        for b in 0..axes[1].len() {
            for c in 0..axes[2].len() {
                for d in 0..axes[3].len() {
                    let kap = kappa_four([cols[0][a], cols[1][b], cols[2][c], cols[3][d]]);
                    if kap > best.0 {
                        best = (kap, [a, b, c, d]);
                    }
                }
            }
        }
    }
    let (opt, kappa_opt) = optimal_sliders(p, pose, current, WorkingMode::HEALTHY, &SliderSearch::default()).unwrap();
    let cells = (0..4)
        .map(|m| (opt[m] - axes[m][best.1[m]]).abs() / pitch)
        .fold(0.0, f64::max);
    SliderOracleCase {
        mode: WorkingMode::HEALTHY,
        kappa_opt,
        kappa_grid: best.0,
        cells,
        pose: *pose,
        grid_best: (0..4).map(|m| axes[m][best.1[m]]).collect(),
    }
}

/// Random single-loss configurations for the 5 mm slider oracle.
pub fn slider_oracle_cases(n: usize, seed: u64) -> Vec<SliderOracleCase> {
    use rayon::prelude::*;
    let p = RobotParams::default();
    let mut r = rng(seed);
    let configs: Vec<(Vector3<f64>, Vector4<f64>, WorkingMode)> = (0..n)
        .map(|c| {
            let pose = random_pose(&mut r);
            let cur = random_sliders(&p, &mut r);
            (pose, cur, WorkingMode::new(2 + (c % 4) as u8).unwrap())
        })
        .collect();
    configs
        .par_iter()
        .map(|(pose, cur, mode)| slider_grid_case(&p, pose, cur, *mode, 5e-3))
        .collect()
}

pub fn double_failure_scenario(seed: u64) -> Scenario {
    let mut sc = Scenario::double_failure();
    sc.run.seed = seed;
    sc
}

pub fn healthy_scenario(seed: u64) -> Scenario {
    let mut sc = Scenario::default();
    sc.run.seed = seed;
    sc
}

/// First time after `from` at which the weight of `mode` exceeds 0.9, and
/// whether it then stays above 0.9 until `until`.
pub fn identification(log: &[LogRecord], mode: WorkingMode, from: f64, until: f64) -> (Option<f64>, bool) {
    let j = mode.index();
    let first = log.iter().find(|r| r.t >= from && r.weights[j] > 0.9).map(|r| r.t);
    let held = match first {
        Some(t0) => log
            .iter()
            .filter(|r| r.t >= t0 && r.t < until)
            .all(|r| r.weights[j] > 0.9),
        None => false,
    };
    (first, held)
}

/// Start of the first 0.5 s stretch of sub-threshold tracking error that lies
/// inside `(from, to]`.
pub fn recovery_time(log: &[LogRecord], from: f64, to: f64, threshold: f64) -> Option<f64> {
    let window = 51;
    let idx: Vec<usize> = (0..log.len()).filter(|&k| log[k].t > from && log[k].t <= to).collect();
    idx.windows(window)
        .find(|w| w.iter().all(|&k| log[k].err_norm < threshold))
        .map(|w| log[w[0]].t)
}

/// Worst per-component RMS estimation error over every 1 s window.
pub fn worst_window_rms(log: &[LogRecord], window: usize) -> Vector3<f64> {
    let mut worst = Vector3::zeros();
    for w in log.windows(window) {
        let mut acc = Vector3::zeros();
        for r in w {
            let e = Vector3::new(r.estimate[0], r.estimate[1], r.estimate[2]) - r.state.pose;
            acc += e.component_mul(&e);
        }
        let rms = (acc / window as f64).map(f64::sqrt);
        worst = worst.sup(&rms);
    }
    worst
}

/// Worst-case bank health seen while replaying a log through a fresh
/// filter bank.
#[derive(Debug)]
pub struct ReplayReport {
    pub ticks: usize,
    pub max_sum_error: f64,
    pub min_weight: f64,
    pub floor: f64,
    pub max_asymmetry: f64,
    pub min_eigenvalue: f64,
    /// Largest difference between the replayed and the logged estimate.
    pub max_estimate_gap: f64,
}

fn asymmetry(p: &Matrix6<f64>) -> f64 {
    (p - p.transpose()).amax() / p.amax().max(1.0)
}

fn min_eigenvalue(p: &Matrix6<f64>) -> f64 {
    SymmetricEigen::new(*p).eigenvalues.min()
}

/// Feeds the logged inputs and measurements back through a bank built the
/// way the closed loop builds it and checks every stored covariance.
pub fn imm_replay(sc: &Scenario, log: &[LogRecord]) -> ReplayReport {
    let pose0 = sc.trajectory.build().at(0.0);
    let mut bank = estimator_bank(sc, &pose0);
    let dt = 1.0 / sc.run.plant_hz as f64;
    let mut rep = ReplayReport {
        ticks: 0,
        max_sum_error: 0.0,
        min_weight: f64::INFINITY,
        floor: sc.imm.weight_floor,
        max_asymmetry: 0.0,
        min_eigenvalue: f64::INFINITY,
        max_estimate_gap: 0.0,
    };
    for r in log {
        let out = imm_step(&mut bank, &sc.robot, &r.input, &r.measurement, dt).unwrap();
        rep.ticks += 1;
        rep.max_sum_error = rep.max_sum_error.max((out.weights.iter().sum::<f64>() - 1.0).abs());
        rep.min_weight = rep
            .min_weight
            .min(out.weights.iter().cloned().fold(f64::INFINITY, f64::min));
        for p in bank.filters.iter().map(|f| &f.p).chain(std::iter::once(&out.p)) {
            rep.max_asymmetry = rep.max_asymmetry.max(asymmetry(p));
            rep.min_eigenvalue = rep.min_eigenvalue.min(min_eigenvalue(p));
        }
        rep.max_estimate_gap = rep.max_estimate_gap.max((out.x - r.estimate).amax());
    }
    rep
}

impl ReplayReport {
    pub fn ok(&self) -> bool {
        self.max_sum_error <= 1e-12
            && self.min_weight >= self.floor * (1.0 - 1e-12)
            && self.max_asymmetry <= 1e-12
            && self.min_eigenvalue >= -1e-9
            && self.max_estimate_gap == 0.0
    }
}

/// Largest deviation of the filter algebra from hand-evaluated two-mode and
/// scalar toys.
pub fn imm_toy_error() -> f64 {
    use cdpr::estimation::{ekf_update, gaussian_likelihood, imm_combine, imm_mix, imm_weight_update};
    use nalgebra::{Matrix1, Vector1};
    let mut worst: f64 = 0.0;
    let mut check = |got: f64, want: f64| worst = worst.max((got - want).abs());

    // Means 0 and 1, unit variances, even weights, uniform transitions: both
    // mixed means sit halfway and gain the spread 0.5 * 0.25 + 0.5 * 0.25.
    let means = [Vector1::new(0.0), Vector1::new(1.0)];
    let covs = [Matrix1::new(1.0), Matrix1::new(1.0)];
    let (x, p, c) = imm_mix(&[0.5, 0.5], &DMatrix::from_element(2, 2, 0.5), &means, &covs).unwrap();
    for j in 0..2 {
        check(x[j][0], 0.5);
        check(p[j][(0, 0)], 1.25);
        check(c[j], 0.5);
    }

    // Identity transitions leave every filter alone.
    let (x, p, _) = imm_mix(
        &[0.3, 0.7],
        &DMatrix::identity(2, 2),
        &[Vector1::new(-2.0), Vector1::new(3.0)],
        &[Matrix1::new(0.5), Matrix1::new(2.0)],
    )
    .unwrap();
    check(x[0][0], -2.0);
    check(x[1][0], 3.0);
    check(p[0][(0, 0)], 0.5);
    check(p[1][(0, 0)], 2.0);

    // Means 0 and 2 at even weight: mean 1, variance 1 + 1.
    let (x, p) = imm_combine(&[0.5, 0.5], &[Vector1::new(0.0), Vector1::new(2.0)], &covs);
    check(x[0], 1.0);
    check(p[(0, 0)], 2.0);

    // 0.2 * 0.4 and 0.8 * 0.1 are equal.
    let u = imm_weight_update(&[0.2, 0.8], &[0.4, 0.1], 0.0);
    check(u.weights[0], 0.5);
    check(u.weights[1], 0.5);
    let u = imm_weight_update(&[0.3, 0.7], &[0.25, 0.25], 0.0);
    check(u.weights[0], 0.3);
    check(u.weights[1], 0.7);

    // Standard normal densities.
    let two_pi = 2.0 * std::f64::consts::PI;
    check(
        gaussian_likelihood(&Vector1::new(0.0), &Matrix1::new(1.0)).unwrap(),
        1.0 / two_pi.sqrt(),
    );
    check(
        gaussian_likelihood(&Vector1::new(1.0), &Matrix1::new(1.0)).unwrap(),
        (-0.5f64).exp() / two_pi.sqrt(),
    );
    check(
        gaussian_likelihood(&Vector3::zeros(), &Matrix3::identity()).unwrap(),
        two_pi.powf(-1.5),
    );

    // Unit prior and unit noise: gain one half on every pose channel.
    let prior = Vector6::new(1.0, 2.0, 0.1, 0.0, 0.0, 0.0);
    let y = Vector3::new(1.2, 1.6, 0.2);
    let u = ekf_update(&prior, &Matrix6::identity(), &y, &Matrix3::identity()).unwrap();
    for i in 0..3 {
        check(u.x[i], prior[i] + 0.5 * (y[i] - prior[i]));
        check(u.p[(i, i)], 0.5);
        check(u.x[i + 3], 0.0);
        check(u.p[(i + 3, i + 3)], 1.0);
    }
    worst
}

/// Random row-stochastic matrix with strictly positive entries.
pub fn random_transition(m: usize, r: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut pi = DMatrix::from_fn(m, m, |_, _| r.random_range(0.01..1.0));
    for i in 0..m {
        let s: f64 = pi.row(i).sum();
        for j in 0..m {
            pi[(i, j)] /= s;
        }
    }
    pi
}

pub fn random_spd(r: &mut ChaCha8Rng) -> Matrix6<f64> {
    let a = Matrix6::from_fn(|_, _| r.random_range(-1.0..1.0));
    a * a.transpose() + Matrix6::identity() * 1e-3
}

/// Largest violation of `sum_j c_j x0_j = sum_i w_i x_i` over random seven-mode banks.
pub fn mixing_conservation_error(n: usize, seed: u64) -> f64 {
    use cdpr::estimation::imm_mix;
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let m = 7;
        let mut w: Vec<f64> = (0..m).map(|_| r.random_range(1e-6..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        let pi = random_transition(m, &mut r);
        let means: Vec<Vector6<f64>> = (0..m)
            .map(|_| Vector6::from_fn(|_, _| r.random_range(-2.0..2.0)))
            .collect();
        let covs: Vec<Matrix6<f64>> = (0..m).map(|_| random_spd(&mut r)).collect();
        let (x0, _, c) = imm_mix(&w, &pi, &means, &covs).unwrap();
        let lhs = (0..m).fold(Vector6::zeros(), |acc, j| acc + x0[j] * c[j]);
        let rhs = (0..m).fold(Vector6::zeros(), |acc, i| acc + means[i] * w[i]);
        worst = worst.max((lhs - rhs).amax());
    }
    worst
}

/// log.csv bytes of a run with the given thread cap.
pub fn log_bytes(sc: &Scenario, threads: Option<usize>) -> Vec<u8> {
    let log = cdpr::sim::run_scenario_with_threads(sc, threads).unwrap();
    let mut out = Vec::new();
    cdpr::cli::write_log(&mut out, &log).unwrap();
    out
}

/// Free response of the noise-free plant under a constant input, started at
/// rest a few centimetres off the input's equilibrium. Returns the largest
/// relative energy increase over one step and the final net cable wrench.
pub fn free_response(seed: u64, mode: WorkingMode, seconds: f64) -> (f64, f64) {
    use cdpr::model::{cable_wrench, mechanical_energy, CableHealth, PlatformState};
    use cdpr::sim::{plant_step_with, Integrator};
    let p = RobotParams::default();
    let mut r = rng(seed);
    let pose = random_pose(&mut r);
    let q = initial_input(&p, &pose).unwrap();
    let health = CableHealth::for_mode(mode);
    let start = pose
        + Vector3::new(
            r.random_range(-0.03..0.03),
            r.random_range(-0.03..0.03),
            r.random_range(-0.05..0.05),
        );
    let mut state = PlatformState::at_rest(start);
    let dt = 0.01;
    let mut energy = mechanical_energy(&p, &state, &q, &health).unwrap();
    let mut rise: f64 = 0.0;
    for _ in 0..(seconds / dt).round() as usize {
        state = plant_step_with(&p, &state, &q, &health, &Vector6::zeros(), dt, Integrator::default()).unwrap();
        let e = mechanical_energy(&p, &state, &q, &health).unwrap();
        rise = rise.max((e - energy) / energy.abs().max(1e-300));
        energy = e;
    }
    (rise, cable_wrench(&p, &state.pose, &q, &health).unwrap().norm())
}

/// Whether the log shows the reference pinned near the point of failure
/// `t_f` and then continuing: a recovery hold starts within 1.2 s, the held
/// sample is at most 12 samples from the one active at `t_f`, it stays
/// pinned for at least two controller ticks and advances again before
/// `t_f + 5`.
pub fn rewinds_to_failure(log: &[LogRecord], t_f: f64) -> bool {
    use cdpr::control::flags::RECOVERY_HOLD;
    let Some(at_failure) = log.iter().rev().find(|r| r.t <= t_f).map(|r| r.reference_index) else {
        return false;
    };
    let Some(start) = log
        .iter()
        .position(|r| r.t > t_f && r.t <= t_f + 1.2 && r.flags & RECOVERY_HOLD != 0)
    else {
        return false;
    };
    let held = log[start].reference_index;
    if held.abs_diff(at_failure) > 12 {
        return false;
    }
    let pinned: Vec<&LogRecord> = log[start..].iter().take_while(|r| r.reference_index == held).collect();
    let ticks = pinned.iter().filter(|r| r.flags & RECOVERY_HOLD != 0).count();
    let resumed = log[start + pinned.len()..]
        .first()
        .is_some_and(|r| r.reference_index > held && r.t <= t_f + 5.0);
    ticks >= 2 && resumed
}
