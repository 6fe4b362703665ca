//! Central finite differences for vector, scalar and matrix fields.
//!
//! These are the reference oracles for every analytic derivative in the
//! crate. Only central stencils are offered.

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Default step: `max(1e-5, 1e-7 * |x|_inf)`.
pub fn default_step(x: &[f64]) -> f64 {
    let inf = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (1e-7 * inf).max(1e-5)
}

fn shifted(x: &[f64], k: usize, delta: f64) -> Vec<f64> {
    let mut z = x.to_vec();
    z[k] += delta;
    z
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {h}"
        )))
    }
}

/// Central-difference Jacobian `J[i][j] = (f(x + h e_j) - f(x - h e_j))_i / 2h`.
pub fn fd_jacobian<F>(f: F, x: &[f64], h: f64) -> Result<Mat>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    check_step(h)?;
    let n = x.len();
    let mut jac = Mat::zeros(n);
    for j in 0..n {
        let plus = eval_checked(&f, &shifted(x, j, h), j, h)?;
        let minus = eval_checked(&f, &shifted(x, j, -h), j, -h)?;
        if plus.len() != n || minus.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: plus.len(),
            });
        }
        for i in 0..n {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

fn eval_checked<F>(f: &F, z: &[f64], coordinate: usize, offset: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let v = f(z)?;
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteStencil { coordinate, offset });
    }
    Ok(v)
}

/// Hessian of a scalar field together with the largest asymmetry of the raw
/// stencil before symmetrization.
#[derive(Debug, Clone)]
pub struct FdHessian {
    pub hessian: Mat,
    pub raw_asymmetry: f64,
}

/// Central second differences of a scalar field, symmetrized as `(H + H^t)/2`.
pub fn fd_hessian_component<F>(f: F, x: &[f64], h: f64) -> Result<Mat>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    fd_hessian_with_asymmetry(f, x, h).map(|r| r.hessian)
}

/// As [`fd_hessian_component`], also reporting the raw stencil asymmetry.
pub fn fd_hessian_with_asymmetry<F>(f: F, x: &[f64], h: f64) -> Result<FdHessian>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    check_step(h)?;
    let n = x.len();
    let eval = |z: &[f64], coordinate: usize, offset: f64| -> Result<f64> {
        let v = f(z)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteStencil { coordinate, offset })
        }
    };
    let f0 = eval(x, 0, 0.0)?;
    let mut raw = Mat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            raw[(i, j)] = if i == j {
                let fp = eval(&shifted(x, i, h), i, h)?;
                let fm = eval(&shifted(x, i, -h), i, -h)?;
                (fp - 2.0 * f0 + fm) / (h * h)
            } else {
                let pp = eval(&shifted(&shifted(x, i, h), j, h), i, h)?;
                let pm = eval(&shifted(&shifted(x, i, h), j, -h), j, -h)?;
                let mp = eval(&shifted(&shifted(x, i, -h), j, h), i, -h)?;
                let mm = eval(&shifted(&shifted(x, i, -h), j, -h), j, -h)?;
                (pp - pm - mp + mm) / (4.0 * h * h)
            };
        }
    }
    let mut raw_asymmetry = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            raw_asymmetry = raw_asymmetry.max((raw[(i, j)] - raw[(j, i)]).abs());
        }
    }
    let hessian = Mat::from_fn(n, |i, j| 0.5 * (raw[(i, j)] + raw[(j, i)]));
    Ok(FdHessian {
        hessian,
        raw_asymmetry,
    })
}

/// Hessians of every component of a vector field, sharing stencil
/// evaluations.
pub fn fd_hessians<F>(f: F, x: &[f64], h: f64) -> Result<Vec<Mat>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    check_step(h)?;
    let n = x.len();
    let f0 = eval_checked(&f, x, 0, 0.0)?;
    let mut out = vec![Mat::zeros(n); f0.len()];
    for i in 0..n {
        let fp = eval_checked(&f, &shifted(x, i, h), i, h)?;
        let fm = eval_checked(&f, &shifted(x, i, -h), i, -h)?;
        for (k, hk) in out.iter_mut().enumerate() {
            hk[(i, i)] = (fp[k] - 2.0 * f0[k] + fm[k]) / (h * h);
        }
        for j in 0..i {
            let pp = eval_checked(&f, &shifted(&shifted(x, i, h), j, h), i, h)?;
            let pm = eval_checked(&f, &shifted(&shifted(x, i, h), j, -h), j, -h)?;
            let mp = eval_checked(&f, &shifted(&shifted(x, i, -h), j, h), i, -h)?;
            let mm = eval_checked(&f, &shifted(&shifted(x, i, -h), j, -h), j, -h)?;
            for (k, hk) in out.iter_mut().enumerate() {
                let v = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h);
                hk[(i, j)] = v;
                hk[(j, i)] = v;
            }
        }
    }
    Ok(out)
}

/// Central difference of a matrix-valued field along axis `k`.
pub fn fd_partial_matrix<G>(g: G, x: &[f64], k: usize, h: f64) -> Result<Mat>
where
    G: Fn(&[f64]) -> Result<Mat>,
{
    check_step(h)?;
    if k >= x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: k,
        });
    }
    let plus = g(&shifted(x, k, h))?;
    let minus = g(&shifted(x, k, -h))?;
    if !plus.is_finite() || !minus.is_finite() {
        return Err(Error::NonFiniteStencil {
            coordinate: k,
            offset: h,
        });
    }
    Ok(plus.checked_sub(&minus)?.scaled(0.5 / h))
}
