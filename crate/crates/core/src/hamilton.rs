//! Cotangent-bundle geometry of the least-squares Hamiltonian
//! `H(x, p) = |p|^2 / 4 + X(x) . p`.

use serde::Serialize;

use crate::error::Result;
use crate::linalg::Mat;
use crate::model::{check_dim, check_finite, VectorField};

/// A point `(x, p)` of the cotangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentPoint {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl CotangentPoint {
    pub fn new(x: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        check_dim(x.len(), &p)?;
        check_finite(&x, "cotangent point x")?;
        check_finite(&p, "cotangent point p")?;
        Ok(CotangentPoint { x, p })
    }

    /// Legendre image of a tangent point: `p = dL/dy = 2 (y - X(x))`.
    pub fn legendre<F: VectorField>(field: &F, x: &[f64], y: &[f64]) -> Result<Self> {
        check_dim(field.dim(), y)?;
        let xv = field.eval(x)?;
        let p = y.iter().zip(&xv).map(|(y, x)| 2.0 * (y - x)).collect();
        CotangentPoint::new(x.to_vec(), p)
    }
}

pub fn hamiltonian<F: VectorField>(field: &F, cp: &CotangentPoint) -> Result<f64> {
    check_dim(field.dim(), &cp.x)?;
    let xv = field.eval(&cp.x)?;
    Ok(cp
        .p
        .iter()
        .zip(&xv)
        .map(|(p, x)| 0.25 * p * p + x * p)
        .sum())
}

/// Hamiltonian canonical nonlinear connection `N_H = J + J^t`.
pub fn connection<F: VectorField>(field: &F, x: &[f64]) -> Result<Mat> {
    check_dim(field.dim(), x)?;
    Ok(connection_from_jacobian(&field.jacobian(x)?))
}

pub fn connection_from_jacobian(j: &Mat) -> Mat {
    Mat::from_fn(j.dim(), |a, b| j[(a, b)] + j[(b, a)])
}

/// Hamiltonian d-torsions `d(J - J^t)/dx^k`.
pub fn torsions<F: VectorField>(field: &F, x: &[f64]) -> Result<Vec<Mat>> {
    check_dim(field.dim(), x)?;
    Ok(torsions_from_hessians(&field.hessians(x)?))
}

pub fn torsions_from_hessians(h: &[Mat]) -> Vec<Mat> {
    let n = h.len();
    (0..n)
        .map(|k| Mat::from_fn(n, |i, j| h[i][(j, k)] - h[j][(i, k)]))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct HamiltonGeometry {
    #[serde(rename = "H")]
    pub hamiltonian: f64,
    #[serde(rename = "N_H")]
    pub connection: Mat,
    #[serde(rename = "R_H")]
    pub torsions: Vec<Mat>,
}

impl HamiltonGeometry {
    pub fn evaluate<F: VectorField>(field: &F, cp: &CotangentPoint) -> Result<Self> {
        Ok(HamiltonGeometry {
            hamiltonian: hamiltonian(field, cp)?,
            connection: connection(field, &cp.x)?,
            torsions: torsions(field, &cp.x)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{P0, X0};
    use crate::lagrange::{self, TangentPoint};
    use crate::model::{CovidModel, LinearField};

    fn model() -> CovidModel {
        CovidModel::new(P0).unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        let m = model();
        let zero = CotangentPoint::new(X0.to_vec(), vec![0.0; 6]).unwrap();
        assert_eq!(hamiltonian(&m, &zero).unwrap(), 0.0);
        let p: Vec<f64> = m.eval(&X0).unwrap().iter().map(|v| -2.0 * v).collect();
        let cp = CotangentPoint::new(X0.to_vec(), p).unwrap();
        assert!((hamiltonian(&m, &cp).unwrap() + 218.295).abs() < 1e-10);
    }

    #[test]
    fn legendre_transform_consistency() {
        let m = model();
        let y = vec![1.0, -3.0, 0.5, 2.0, 0.0, 7.0];
        let cp = CotangentPoint::legendre(&m, &X0, &y).unwrap();
        let l = lagrange::lagrangian(&m, &TangentPoint::new(X0.to_vec(), y.clone()).unwrap()).unwrap();
        let py: f64 = cp.p.iter().zip(&y).map(|(p, y)| p * y).sum();
        let h = hamiltonian(&m, &cp).unwrap();
        assert!((h - (py - l)).abs() < 1e-12 * (1.0 + h.abs()));
    }

    #[test]
    fn connection_fixed_entries() {
        let n = connection(&model(), &X0).unwrap();
        assert!(n.is_symmetric());
        assert!((n[(3, 3)] + 0.3).abs() < 1e-15);
        assert!((n[(2, 2)] + 0.32).abs() < 1e-15);
        assert_eq!(n[(2, 4)], P0.phi_s);
        assert_eq!(n[(2, 5)], P0.gamma_s);
        assert_eq!(n[(3, 5)], P0.gamma_a);
        assert_eq!(n[(4, 5)], P0.gamma_h);
        assert_eq!(n[(5, 4)], P0.gamma_h);
        assert_eq!(n[(5, 5)], 0.0);
    }

    #[test]
    fn torsions_are_minus_twice_lagrangian() {
        let m = model();
        let rh = torsions(&m, &X0).unwrap();
        let rl = lagrange::torsions(&m, &X0).unwrap();
        for (a, b) in rh.iter().zip(&rl) {
            assert!(a.checked_add(&b.scaled(2.0)).unwrap().max_abs() <= 1e-12);
        }
        for i in 2..6 {
            for j in 2..6 {
                assert_eq!(rh[5][(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn linear_field_has_no_hamiltonian_torsion() {
        let f = LinearField::new(Mat::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap());
        assert!(torsions(&f, &[1.0, 2.0]).unwrap().iter().all(|m| m.max_abs() == 0.0));
    }

    #[test]
    fn report_keys() {
        let m = model();
        let cp = CotangentPoint::new(X0.to_vec(), vec![0.0; 6]).unwrap();
        let v = serde_json::to_value(HamiltonGeometry::evaluate(&m, &cp).unwrap()).unwrap();
        for key in ["H", "N_H", "R_H"] {
            assert!(v.get(key).is_some());
        }
    }
}
