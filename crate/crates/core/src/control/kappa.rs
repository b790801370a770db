use nalgebra::{DMatrix, DVector};

use crate::model::MotionModel;

/// Rows of the pulling map the cables are asked to balance in each motion
/// model. With one cable lost the moment row is ignored; with a single
/// vertical cable pair only the vertical force row remains.
pub fn controlled_rows(model: MotionModel) -> &'static [usize] {
    match model {
        MotionModel::FourCable => &[0, 1, 2],
        MotionModel::ThreeCable => &[0, 1],
        MotionModel::TwoCable => &[1],
    }
}

/// Selects `rows` of `p`.
pub fn reduce_rows(p: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), p.ncols(), |r, c| p[(rows[r], c)])
}

#[inline]
fn det2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    a * d - b * c
}

#[inline]
fn det3(c0: &[f64; 3], c1: &[f64; 3], c2: &[f64; 3]) -> f64 {
    c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) - c1[0] * (c0[1] * c2[2] - c0[2] * c2[1])
        + c2[0] * (c0[1] * c1[2] - c0[2] * c1[1])
}

/// Generalised cross product of an `m x (m+1)` matrix given by columns
/// (`m <= 3`, only the first `m` entries of every column are read).
///
/// Returns `None` when the matrix is rank deficient, i.e. when the null
/// space is not one-dimensional.
pub fn cofactor_null(cols: &[[f64; 3]], m: usize) -> Option<[f64; 4]> {
    let n = cols.len();
    if n != m + 1 || !(1..=3).contains(&m) {
        return None;
    }
    let mut z = [0.0; 4];
    match m {
        1 => {
            z[0] = cols[1][0];
            z[1] = -cols[0][0];
        }
        2 => {
            let d = |i: usize, j: usize| det2(cols[i][0], cols[j][0], cols[i][1], cols[j][1]);
            z[0] = d(1, 2);
            z[1] = -d(0, 2);
            z[2] = d(0, 1);
        }
        _ => {
            z[0] = det3(&cols[1], &cols[2], &cols[3]);
            z[1] = -det3(&cols[0], &cols[2], &cols[3]);
            z[2] = det3(&cols[0], &cols[1], &cols[3]);
            z[3] = -det3(&cols[0], &cols[1], &cols[2]);
        }
    }
    let scale: f64 = cols
        .iter()
        .map(|c| c[..m].iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(1.0, |acc, nrm| acc * nrm.max(1e-300));
    let zn = z[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
    if !zn.is_finite() || zn <= 1e-12 * scale {
        return None;
    }
    Some(z)
}

/// `min z / max z` for a sign-uniform null vector, 0 otherwise.
pub fn kappa_from_null_vector(z: &[f64]) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    let all_pos = z.iter().all(|&v| v > 0.0);
    let all_neg = z.iter().all(|&v| v < 0.0);
    if !(all_pos || all_neg) {
        return 0.0;
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for v in z {
        let a = v.abs();
        lo = lo.min(a);
        hi = hi.max(a);
    }
    lo / hi
}

fn columns_of(p: &DMatrix<f64>) -> Option<Vec<[f64; 3]>> {
    if p.nrows() > 3 {
        return None;
    }
    Some(
        (0..p.ncols())
            .map(|c| {
                let mut col = [0.0; 3];
                for r in 0..p.nrows() {
                    col[r] = p[(r, c)];
                }
                col
            })
            .collect(),
    )
}

/// Unit, positively oriented null vector of `p` when the null space is
/// one-dimensional.
pub fn null_vector(p: &DMatrix<f64>) -> Option<DVector<f64>> {
    let cols = columns_of(p)?;
    let z = cofactor_null(&cols, p.nrows())?;
    let mut v = DVector::from_column_slice(&z[..p.ncols()]);
    if v.iter().sum::<f64>() < 0.0 {
        v = -v;
    }
    let n = v.norm();
    Some(v / n)
}

/// Conditioning measure of a pulling map in `[0, 1]`.
///
/// Uses the ratio of the smallest to largest null-vector entry when the null
/// space is one-dimensional, falling back to `sigma_min / sigma_max` for any
/// other null-space dimension.
pub fn manipulability_kappa(p: &DMatrix<f64>) -> f64 {
    if p.ncols() == p.nrows() + 1 {
        if let Some(cols) = columns_of(p) {
            if let Some(z) = cofactor_null(&cols, p.nrows()) {
                return kappa_from_null_vector(&z[..p.ncols()]);
            }
        }
    }
    singular_value_ratio(p)
}

pub fn singular_value_ratio(p: &DMatrix<f64>) -> f64 {
    if p.is_empty() {
        return 0.0;
    }
    let sv = p.clone().singular_values();
    let max = sv.max();
    if max <= 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}
