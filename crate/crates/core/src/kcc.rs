//! KCC invariants of the Euler-Lagrange system `x'' + 2G(x, x') = 0`:
//! the first invariant, the `E` matrix of its delta-derivatives, the
//! deviation curvature `P` and the Jacobi stability verdict.

use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::lagrange::{torsions_from_hessians, TangentPoint};
use crate::linalg::{eigenvalues, ComplexSpectrum, Mat, DEFAULT_EIGEN_TOL};
use crate::model::{check_dim, VectorField};

/// `E^i = -1/2 (J_ij - J_ji) y^j - J_ji X^j`.
pub fn first_invariant<F: VectorField>(field: &F, tp: &TangentPoint) -> Result<Vec<f64>> {
    check_dim(field.dim(), &tp.x)?;
    let xv = field.eval(&tp.x)?;
    let j = field.jacobian(&tp.x)?;
    Ok(first_invariant_from(&j, &xv, &tp.y))
}

pub(crate) fn first_invariant_from(j: &Mat, xv: &[f64], y: &[f64]) -> Vec<f64> {
    let n = j.dim();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|l| -0.5 * (j[(i, l)] - j[(l, i)]) * y[l] - j[(l, i)] * xv[l])
                .sum()
        })
        .collect()
}

/// The matrix `E^i_j = delta E^i / delta x^j`.
pub fn curvature_matrix_e<F: VectorField>(field: &F, tp: &TangentPoint) -> Result<Mat> {
    check_dim(field.dim(), &tp.x)?;
    let xv = field.eval(&tp.x)?;
    let j = field.jacobian(&tp.x)?;
    let h = field.hessians(&tp.x)?;
    Ok(curvature_matrix_from(&j, &h, &xv, &tp.y))
}

pub(crate) fn curvature_matrix_from(j: &Mat, h: &[Mat], xv: &[f64], y: &[f64]) -> Mat {
    let n = j.dim();
    Mat::from_fn(n, |a, b| {
        (0..n)
            .map(|k| {
                -0.5 * (h[a][(b, k)] - h[k][(a, b)]) * y[k]
                    - h[k][(a, b)] * xv[k]
                    - j[(k, a)] * j[(k, b)]
                    - 0.25 * (j[(k, b)] - j[(b, k)]) * (j[(a, k)] - j[(k, a)])
            })
            .sum()
    })
}

/// `P = sum_k R_k y^k + E`.
pub fn deviation_curvature<F: VectorField>(field: &F, tp: &TangentPoint) -> Result<Mat> {
    check_dim(field.dim(), &tp.x)?;
    let xv = field.eval(&tp.x)?;
    let j = field.jacobian(&tp.x)?;
    let h = field.hessians(&tp.x)?;
    Ok(deviation_from(&j, &h, &xv, &tp.y))
}

fn deviation_from(j: &Mat, h: &[Mat], xv: &[f64], y: &[f64]) -> Mat {
    let r = torsions_from_hessians(h);
    let mut p = curvature_matrix_from(j, h, xv, y);
    for (rk, yk) in r.iter().zip(y) {
        p = p.checked_add(&rk.scaled(*yk)).expect("matching dimensions");
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JacobiClass {
    Stable,
    Unstable,
    Marginal,
}

impl JacobiClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            JacobiClass::Stable => "stable",
            JacobiClass::Unstable => "unstable",
            JacobiClass::Marginal => "marginal",
        }
    }
}

impl fmt::Display for JacobiClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classification band: `eps = margin_abs + margin_rel * (1 + |P|_F)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityOptions {
    pub margin_rel: f64,
    pub margin_abs: f64,
    pub eigen_tol: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions {
            margin_rel: 1e-9,
            margin_abs: 0.0,
            eigen_tol: DEFAULT_EIGEN_TOL,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityVerdict {
    pub eigenvalues: ComplexSpectrum,
    pub max_real_part: f64,
    #[serde(rename = "class")]
    pub classification: JacobiClass,
    /// `|max_real_part|`
    pub margin: f64,
}

/// Classifies a prebuilt deviation-curvature matrix.
pub fn classify(p: &Mat, opts: &StabilityOptions) -> Result<StabilityVerdict> {
    let spectrum = eigenvalues(p, opts.eigen_tol)?;
    let max_real_part = spectrum.max_real_part();
    let eps = opts.margin_abs + opts.margin_rel * (1.0 + p.frobenius_norm());
    let classification = if max_real_part < -eps {
        JacobiClass::Stable
    } else if max_real_part > eps {
        JacobiClass::Unstable
    } else {
        JacobiClass::Marginal
    };
    Ok(StabilityVerdict {
        eigenvalues: spectrum,
        max_real_part,
        classification,
        margin: max_real_part.abs(),
    })
}

pub fn jacobi_stability<F: VectorField>(
    field: &F,
    tp: &TangentPoint,
    opts: &StabilityOptions,
) -> Result<StabilityVerdict> {
    classify(&deviation_curvature(field, tp)?, opts)
}

/// All KCC objects at one tangent point.
#[derive(Debug, Clone, Serialize)]
pub struct KccGeometry {
    pub first_invariant: Vec<f64>,
    #[serde(rename = "E")]
    pub curvature_e: Mat,
    #[serde(rename = "P")]
    pub deviation: Mat,
    pub stability: StabilityVerdict,
}

impl KccGeometry {
    pub fn evaluate<F: VectorField>(
        field: &F,
        tp: &TangentPoint,
        opts: &StabilityOptions,
    ) -> Result<Self> {
        check_dim(field.dim(), &tp.x)?;
        let xv = field.eval(&tp.x)?;
        let j = field.jacobian(&tp.x)?;
        let h = field.hessians(&tp.x)?;
        let deviation = deviation_from(&j, &h, &xv, &tp.y);
        Ok(KccGeometry {
            first_invariant: first_invariant_from(&j, &xv, &tp.y),
            curvature_e: curvature_matrix_from(&j, &h, &xv, &tp.y),
            stability: classify(&deviation, opts)?,
            deviation,
        })
    }
}
