//! Tangent-bundle geometry of the least-squares Lagrangian
//! `L(x, y) = |y - X(x)|^2`.
//!
//! Everything here is expressed through the Jacobian `J` and the component
//! Hessians of the field:
//!
//! * semispray `G^k = -1/2 [(J_kj - J_jk) y^j + J_jk X^j]`
//! * nonlinear connection `N = -1/2 (J - J^t)` (skew-symmetric)
//! * d-torsions `R_k = dN/dx^k`
//! * Yang-Mills energy `1/2 Tr(F F^t)` with `F = -N`

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::{check_dim, check_finite, VectorField};

/// A point `(x, y)` of the tangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TangentPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_dim(x.len(), &y)?;
        check_finite(&x, "tangent point x")?;
        check_finite(&y, "tangent point y")?;
        Ok(TangentPoint { x, y })
    }

    /// The point with `y = X(x)`, i.e. tangent to a solution curve.
    pub fn on_shell<F: VectorField>(field: &F, x: &[f64]) -> Result<Self> {
        let y = field.eval(x)?;
        TangentPoint::new(x.to_vec(), y)
    }

    fn check<F: VectorField>(&self, field: &F) -> Result<()> {
        check_dim(field.dim(), &self.x)?;
        check_dim(field.dim(), &self.y)
    }
}

pub fn lagrangian<F: VectorField>(field: &F, tp: &TangentPoint) -> Result<f64> {
    tp.check(field)?;
    let xv = field.eval(&tp.x)?;
    Ok(tp.y.iter().zip(&xv).map(|(y, x)| (y - x) * (y - x)).sum())
}

pub fn semispray<F: VectorField>(field: &F, tp: &TangentPoint) -> Result<Vec<f64>> {
    tp.check(field)?;
    let xv = field.eval(&tp.x)?;
    let j = field.jacobian(&tp.x)?;
    Ok(semispray_from(&j, &xv, &tp.y))
}

pub(crate) fn semispray_from(j: &Mat, xv: &[f64], y: &[f64]) -> Vec<f64> {
    let n = j.dim();
    (0..n)
        .map(|k| {
            let s: f64 = (0..n)
                .map(|l| (j[(k, l)] - j[(l, k)]) * y[l] + j[(l, k)] * xv[l])
                .sum();
            -0.5 * s
        })
        .collect()
}

/// `x'' + 2 G(x, x')` along a uniformly sampled curve, at interior samples.
///
/// Both derivatives are second-order central differences, so for an exact
/// solution of `x' = X(x)` the residual is `O(dt^2)`.
pub fn euler_lagrange_residual<F: VectorField>(
    field: &F,
    times: &[f64],
    states: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    if times.len() != states.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: states.len(),
        });
    }
    if times.len() < 3 {
        return Err(Error::TooFewSamples(times.len()));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::NonUniformSampling { index: 0 });
    }
    for (idx, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(w[1].abs()) {
            return Err(Error::NonUniformSampling { index: idx });
        }
    }
    let n = field.dim();
    (1..times.len() - 1)
        .map(|s| {
            let (prev, cur, next) = (&states[s - 1], &states[s], &states[s + 1]);
            check_dim(n, cur)?;
            let accel: Vec<f64> = (0..n)
                .map(|i| (next[i] - 2.0 * cur[i] + prev[i]) / (dt * dt))
                .collect();
            let vel: Vec<f64> = (0..n).map(|i| (next[i] - prev[i]) / (2.0 * dt)).collect();
            let g = semispray(field, &TangentPoint::new(cur.clone(), vel)?)?;
            Ok(accel.iter().zip(&g).map(|(a, g)| a + 2.0 * g).collect())
        })
        .collect()
}

/// Lagrangian canonical nonlinear connection at `x`.
pub fn connection<F: VectorField>(field: &F, x: &[f64]) -> Result<Mat> {
    check_dim(field.dim(), x)?;
    Ok(connection_from_jacobian(&field.jacobian(x)?))
}

/// `N = -1/2 (J - J^t)`; skew-symmetric bit for bit.
pub fn connection_from_jacobian(j: &Mat) -> Mat {
    Mat::from_fn(j.dim(), |a, b| -0.5 * (j[(a, b)] - j[(b, a)]))
}

/// d-torsions `R_k = dN/dx^k`, one skew matrix per axis.
pub fn torsions<F: VectorField>(field: &F, x: &[f64]) -> Result<Vec<Mat>> {
    check_dim(field.dim(), x)?;
    Ok(torsions_from_hessians(&field.hessians(x)?))
}

/// `(R_k)^i_j = -1/2 (d2X^i/dx^j dx^k - d2X^j/dx^i dx^k)`.
pub fn torsions_from_hessians(h: &[Mat]) -> Vec<Mat> {
    let n = h.len();
    (0..n)
        .map(|k| Mat::from_fn(n, |i, j| -0.5 * (h[i][(j, k)] - h[j][(i, k)])))
        .collect()
}

pub fn yang_mills_energy<F: VectorField>(field: &F, x: &[f64]) -> Result<f64> {
    Ok(yang_mills_from_connection(&connection(field, x)?))
}

/// `1/2 Tr(F F^t)` with `F = -N`.
pub fn yang_mills_from_connection(n: &Mat) -> f64 {
    let f = n.scaled(-1.0);
    let ff = f
        .checked_mul(&f.transpose())
        .expect("square matrix times its transpose");
    0.5 * ff.trace()
}

/// `sum_{i<j} (N^i_j)^2`; equals the trace form for a skew connection.
pub fn yang_mills_upper_sum(n: &Mat) -> f64 {
    let d = n.dim();
    (0..d)
        .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
        .map(|(i, j)| n[(i, j)] * n[(i, j)])
        .sum()
}

/// Every Lagrangian object at one tangent point.
#[derive(Debug, Clone, Serialize)]
pub struct LagrangeGeometry {
    #[serde(rename = "L")]
    pub lagrangian: f64,
    #[serde(rename = "G")]
    pub semispray: Vec<f64>,
    #[serde(rename = "N")]
    pub connection: Mat,
    #[serde(rename = "R")]
    pub torsions: Vec<Mat>,
    #[serde(rename = "EYM")]
    pub yang_mills: f64,
}

impl LagrangeGeometry {
    pub fn evaluate<F: VectorField>(field: &F, tp: &TangentPoint) -> Result<Self> {
        tp.check(field)?;
        let xv = field.eval(&tp.x)?;
        let j = field.jacobian(&tp.x)?;
        let h = field.hessians(&tp.x)?;
        let connection = connection_from_jacobian(&j);
        Ok(LagrangeGeometry {
            lagrangian: tp.y.iter().zip(&xv).map(|(y, x)| (y - x) * (y - x)).sum(),
            semispray: semispray_from(&j, &xv, &tp.y),
            yang_mills: yang_mills_from_connection(&connection),
            connection,
            torsions: torsions_from_hessians(&h),
        })
    }
}
