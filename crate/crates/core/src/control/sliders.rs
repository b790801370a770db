use nalgebra::{Vector2, Vector3, Vector4};

use super::kappa::{cofactor_null, controlled_rows, kappa_from_null_vector, singular_value_ratio};
use super::ControlError;
use crate::model::{cross2, rotation, MotionModel, RobotParams, WorkingMode, MIN_CABLE_LENGTH};

/// Tuning of the slider redundancy-resolution search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliderSearch {
    /// Total points of the joint coarse grid; the points per rail follow
    /// from the number of surviving sliders.
    pub coarse_budget: usize,
    /// Best coarse-grid local maxima refined as distant starts.
    pub starts: usize,
    /// Polls allowed per refinement.
    pub max_polls: usize,
    /// First step from the current sliders, as a fraction of the rail
    /// length.
    pub initial_step: f64,
    /// Refinement stops once the step falls below this (m).
    pub min_step: f64,
    /// A distant optimum must beat the local one by this much to be taken.
    pub switch_margin: f64,
}

impl Default for SliderSearch {
    fn default() -> Self {
        Self {
            coarse_budget: 3_000,
            starts: 6,
            max_polls: 2_000,
            initial_step: 1.0 / 20.0,
            min_step: 1e-6,
            switch_margin: 1e-6,
        }
    }
}

/// Evaluates kappa of the reduced pulling map at a fixed pose as a function
/// of the surviving sliders only.
pub struct KappaField<'a> {
    params: &'a RobotParams,
    attach_world: [Vector2<f64>; 4],
    arms: [Vector2<f64>; 4],
    cables: Vec<usize>,
    rows: &'static [usize],
}

impl<'a> KappaField<'a> {
    pub fn new(params: &'a RobotParams, pose: &Vector3<f64>, mode: WorkingMode) -> Self {
        let rot = rotation(pose.z);
        let centre = Vector2::new(pose.x, pose.y);
        let arms: [Vector2<f64>; 4] = std::array::from_fn(|i| rot * params.attachment(i));
        Self {
            params,
            attach_world: std::array::from_fn(|i| centre + arms[i]),
            arms,
            cables: mode.surviving_cables(),
            rows: controlled_rows(mode.motion_model()),
        }
    }

    pub fn cables(&self) -> &[usize] {
        &self.cables
    }

    fn column(&self, cable: usize, slider: f64) -> Option<[f64; 3]> {
        let d = self.params.rails[cable].anchor(slider) - self.attach_world[cable];
        let l = d.norm();
        if l < MIN_CABLE_LENGTH {
            return None;
        }
        let u = d / l;
        let full = [u.x, u.y, cross2(&self.arms[cable], &u)];
        let mut col = [0.0; 3];
        for (r, &row) in self.rows.iter().enumerate() {
            col[r] = full[row];
        }
        Some(col)
    }

    fn kappa_of_columns(&self, cols: &[[f64; 3]]) -> f64 {
        let n = cols.len();
        let m = self.rows.len();
        if n == m + 1 {
            if let Some(z) = cofactor_null(cols, m) {
                return kappa_from_null_vector(&z[..n]);
            }
        }
        let p = nalgebra::DMatrix::from_fn(m, n, |r, c| cols[c][r]);
        singular_value_ratio(&p)
    }

    /// Kappa for slider values listed in surviving-cable order.
    pub fn kappa(&self, sliders: &[f64]) -> f64 {
        let mut cols = [[0.0; 3]; 4];
        for (k, (&cable, &s)) in self.cables.iter().zip(sliders).enumerate() {
            match self.column(cable, s) {
                Some(c) => cols[k] = c,
                None => return 0.0,
            }
        }
        self.kappa_of_columns(&cols[..self.cables.len()])
    }

    pub fn kappa_full(&self, sliders: &Vector4<f64>) -> f64 {
        let s: Vec<f64> = self.cables.iter().map(|&c| sliders[c]).collect();
        self.kappa(&s)
    }

    fn bounds(&self, k: usize) -> [f64; 2] {
        self.params.rails[self.cables[k]].interval
    }

    /// Kappa at every point of the product grid `axes`, first axis fastest.
    /// Each column depends on its own slider only, so columns are computed
    /// once per axis value.
    fn grid(&self, axes: &[Vec<f64>]) -> Vec<f64> {
        let n = axes.len();
        let cols: Vec<Vec<Option<[f64; 3]>>> = axes
            .iter()
            .enumerate()
            .map(|(k, axis)| axis.iter().map(|&s| self.column(self.cables[k], s)).collect())
            .collect();
        let total: usize = axes.iter().map(Vec::len).product();
        let mut idx = vec![0usize; n];
        let mut out = Vec::with_capacity(total);
        let mut buf = [[0.0; 3]; 4];
        for _ in 0..total {
            let mut ok = true;
            for k in 0..n {
                match cols[k][idx[k]] {
                    Some(c) => buf[k] = c,
                    None => ok = false,
                }
            }
            out.push(if ok { self.kappa_of_columns(&buf[..n]) } else { 0.0 });
            for k in 0..n {
                idx[k] += 1;
                if idx[k] < axes[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
        out
    }
}

fn decode(mut code: usize, lens: &[usize]) -> Vec<usize> {
    lens.iter()
        .map(|&len| {
            let j = code % len;
            code /= len;
            j
        })
        .collect()
}

/// Largest number of points per axis, at least `min` and at most 21, whose
/// `n`-dimensional grid fits in `budget`.
fn points_per_axis(budget: usize, n: usize, min: usize) -> usize {
    let mut m = min;
    while m < 21 && (m + 1).pow(n as u32) <= budget {
        m += 1;
    }
    m
}

/// Van der Corput radical inverse of `index` in `base`.
fn radical_inverse(mut index: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// Poll directions for iteration `k`: the columns of the Householder
/// reflection of a Halton point and their negatives. They rotate
/// deterministically and become dense over the iterations.
fn poll_directions(n: usize, k: usize) -> Vec<Vec<f64>> {
    const BASES: [usize; 4] = [2, 3, 5, 7];
    let mut v: Vec<f64> = (0..n).map(|i| 2.0 * radical_inverse(k + 1, BASES[i]) - 1.0).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-9 {
        v = vec![0.0; n];
        v[0] = 1.0;
    } else {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    let mut dirs = Vec::with_capacity(2 * n);
    for j in 0..n {
        let col: Vec<f64> = (0..n)
            .map(|i| if i == j { 1.0 } else { 0.0 } - 2.0 * v[i] * v[j])
            .collect();
        dirs.push(col.iter().map(|x| -x).collect());
        dirs.push(col);
    }
    dirs
}

/// Consecutive failed polls at one step length before it is halved.
const POLL_FAILURES: usize = 3;

/// Local maximisation by a pattern search whose poll directions rotate
/// every iteration. Kappa has narrow ridges where two null-vector entries
/// tie; a fixed direction set stalls on them, rotating directions do not.
/// The last successful direction is tried again first.
fn ridge_search(field: &KappaField, start: Vec<f64>, initial_step: f64, search: &SliderSearch) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut x = start;
    let mut best = field.kappa(&x);
    let mut step = initial_step;
    let mut failures = 0;
    let mut last: Option<Vec<f64>> = None;
    for k in 0..search.max_polls {
        if step < search.min_step {
            break;
        }
        let mut dirs = poll_directions(n, k);
        if let Some(d) = last.take() {
            dirs.insert(0, d);
        }
        let mut found: Option<(Vec<f64>, f64, usize)> = None;
        for (i, d) in dirs.iter().enumerate() {
            let trial: Vec<f64> = (0..n)
                .map(|j| {
                    let [lo, hi] = field.bounds(j);
                    (x[j] + step * d[j]).clamp(lo, hi)
                })
                .collect();
            let kap = field.kappa(&trial);
            if kap > found.as_ref().map_or(best + 1e-12, |f| f.1) {
                found = Some((trial, kap, i));
            }
        }
        match found {
            Some((t, v, i)) => {
                x = t;
                best = v;
                last = Some(dirs.swap_remove(i));
                step = (2.0 * step).min(initial_step);
                failures = 0;
            }
            None => {
                failures += 1;
                if failures >= POLL_FAILURES {
                    step *= 0.5;
                    failures = 0;
                }
            }
        }
    }
    (x, best)
}

/// Local maxima of kappa over a joint coarse grid, best first. A grid point
/// counts as a local maximum when no neighbour in any `{-1, 0, 1}`
/// direction is better.
fn coarse_maxima(field: &KappaField, points: usize) -> Vec<(Vec<f64>, f64)> {
    let n = field.cables().len();
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let [lo, hi] = field.bounds(k);
            (0..points)
                .map(|j| lo + (hi - lo) * j as f64 / (points - 1).max(1) as f64)
                .collect()
        })
        .collect();
    let lens = vec![points; n];
    let values = field.grid(&axes);
    let mut maxima: Vec<(Vec<f64>, f64)> = Vec::new();
    for (code, &v) in values.iter().enumerate() {
        if v <= 0.0 {
            continue;
        }
        let idx = decode(code, &lens);
        let is_max = (0..3usize.pow(n as u32)).all(|dir| {
            let step = decode(dir, &vec![3; n]);
            let mut other = 0;
            let mut stride = 1;
            for (&i, &d) in idx.iter().zip(&step) {
                let j = i as isize + d as isize - 1;
                if j < 0 || j >= points as isize {
                    return true;
                }
                other += j as usize * stride;
                stride *= points;
            }
            values[other] <= v
        });
        if is_max {
            maxima.push((idx.iter().enumerate().map(|(k, &j)| axes[k][j]).collect(), v));
        }
    }
    maxima.sort_by(|a, b| b.1.total_cmp(&a.1));
    maxima
}

/// Slider configuration maximising kappa at `pose` for the surviving cables.
///
/// A rotating-direction pattern search runs from the current sliders and from the
/// best local maxima of a joint coarse grid. The local result wins unless a
/// distant one is better by `switch_margin`. Lost cables keep their current
/// slider.
pub fn optimal_sliders(
    params: &RobotParams,
    pose: &Vector3<f64>,
    current: &Vector4<f64>,
    mode: WorkingMode,
    search: &SliderSearch,
) -> Result<(Vector4<f64>, f64), ControlError> {
    let field = KappaField::new(params, pose, mode);
    let cables = field.cables().to_vec();
    let max_len = (0..cables.len())
        .map(|k| field.bounds(k)[1] - field.bounds(k)[0])
        .fold(0.0, f64::max);
    let start: Vec<f64> = cables.iter().map(|&c| params.rails[c].clamp(current[c])).collect();
    let local = ridge_search(&field, start, max_len * search.initial_step, search);
    let points = points_per_axis(search.coarse_budget, cables.len(), 2);
    let coarse_pitch = max_len / (points - 1) as f64;
    let global = coarse_maxima(&field, points)
        .into_iter()
        .take(search.starts)
        .map(|(x, _)| ridge_search(&field, x, coarse_pitch, search))
        .fold(None::<(Vec<f64>, f64)>, |best, c| match best {
            Some(b) if b.1 >= c.1 => Some(b),
            _ => Some(c),
        });
    let chosen = match global {
        Some(g) if g.1 > local.1 + search.switch_margin => g,
        _ => local,
    };
    if chosen.1 <= 0.0 {
        return Err(ControlError::NoFeasibleSliders);
    }
    let mut out = *current;
    for (k, &c) in cables.iter().enumerate() {
        out[c] = chosen.0[k];
    }
    Ok((out, chosen.1))
}

/// Rate-limits a slider move to `|delta| <= v_max * dt` per slider.
pub fn clamp_slider_step(target: &Vector4<f64>, current: &Vector4<f64>, v_max: f64, dt: f64) -> Vector4<f64> {
    let lim = v_max * dt;
    current + (target - current).map(|d| d.clamp(-lim, lim))
}

/// Slider positions that put each surviving anchor level with its
/// attachment point, so the cable pair of a two-cable mode hangs straight.
pub fn aligned_sliders(
    params: &RobotParams,
    pose: &Vector3<f64>,
    current: &Vector4<f64>,
    mode: WorkingMode,
) -> Vector4<f64> {
    let rot = rotation(pose.z);
    let centre = Vector2::new(pose.x, pose.y);
    let mut out = *current;
    for c in mode.surviving_cables() {
        let rail = &params.rails[c];
        let p = centre + rot * params.attachment(c);
        let along = (p - Vector2::from(rail.origin)).dot(&Vector2::from(rail.direction));
        out[c] = rail.clamp(along);
    }
    out
}

/// One redundancy-resolution step of the sliders toward the best
/// configuration for `x_desired`, rate limited and kept on the rails.
///
/// In two-cable modes the cables only hold the vertical DOF, so the sliders
/// instead follow `x_desired` horizontally (it is the PD output, so this is
/// the same tracking law applied through the sliders).
pub fn optimize_sliders(
    params: &RobotParams,
    x_desired: &Vector3<f64>,
    current: &Vector4<f64>,
    mode: WorkingMode,
    dt: f64,
    search: &SliderSearch,
) -> Result<Vector4<f64>, ControlError> {
    let target = match mode.motion_model() {
        MotionModel::TwoCable => aligned_sliders(params, x_desired, current, mode),
        _ => optimal_sliders(params, x_desired, current, mode, search)?.0,
    };
    let stepped = clamp_slider_step(&target, current, params.v_slider_max, dt);
    Ok(params.clamp_sliders(&stepped))
}
