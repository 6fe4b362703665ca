//! Self-check suite: analytic derivatives against finite differences,
//! structural identities, conservation and the Euler-Lagrange residual.

use std::fmt::Write as _;

use serde::Serialize;

use crate::calculus::{default_step, fd_jacobian, fd_partial_matrix};
use crate::error::Result;
use crate::hamilton;
use crate::kcc::first_invariant;
use crate::lagrange::{
    self, connection, euler_lagrange_residual, semispray, torsions, yang_mills_from_connection,
    yang_mills_upper_sum, TangentPoint,
};
use crate::linalg::Mat;
use crate::model::VectorField;
use crate::ode::{integrate_adaptive, integrate_rk4, AdaptiveOptions};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    /// Worst (scaled) deviation found.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Where the worst deviation occurred.
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// The failing check with the largest `value / tolerance`.
    pub fn worst_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).max_by(|a, b| {
            let ra = a.value / a.tolerance.max(f64::MIN_POSITIVE);
            let rb = b.value / b.tolerance.max(f64::MIN_POSITIVE);
            ra.total_cmp(&rb)
        })
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<30} {:>12} {:>12}  {:<6} worst at", "check", "value", "tolerance", "status");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<30} {:>12.3e} {:>12.3e}  {:<6} {}",
                c.name,
                c.value,
                c.tolerance,
                if c.passed { "PASS" } else { "FAIL" },
                c.detail
            );
        }
        out
    }
}

/// Running maximum with the location that produced it.
struct Worst {
    value: f64,
    detail: String,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: 0.0,
            detail: "-".into(),
        }
    }

    fn offer(&mut self, value: f64, detail: impl FnOnce() -> String) {
        if value > self.value || value.is_nan() {
            self.value = value;
            self.detail = detail();
        }
    }

    fn finish(self, name: &'static str, tolerance: f64) -> CheckResult {
        CheckResult {
            name,
            passed: self.value <= tolerance,
            value: self.value,
            tolerance,
            detail: self.detail,
        }
    }
}

/// `max |a - b| / (1 + max |b|)` with the offending entry.
fn scaled_diff(a: &Mat, b: &Mat) -> (f64, (usize, usize)) {
    let scale = 1.0 + b.max_abs();
    let n = a.dim();
    let mut best = (0.0, (0, 0));
    for i in 0..n {
        for j in 0..n {
            let d = (a[(i, j)] - b[(i, j)]).abs() / scale;
            if d > best.0 || d.is_nan() {
                best = (d, (i, j));
            }
        }
    }
    best
}

/// Tolerances of the suite.
pub const FD_TOL: f64 = 1e-6;
pub const IDENTITY_TOL: f64 = 1e-12;
pub const CONSERVATION_TOL: f64 = 1e-8;
pub const EL_RESIDUAL_TOL: f64 = 1e-3;

/// Settings for the trajectory-based checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub t_span: (f64, f64),
    pub dt: f64,
    pub adaptive: AdaptiveOptions,
}

/// Runs every check at `x0` and at three states along its trajectory.
pub fn run_suite<F: VectorField>(field: &F, x0: &[f64], d0: f64, opts: &SuiteOptions) -> Result<ValidationReport> {
    let mut samples = vec![x0.to_vec()];
    let probe = integrate_rk4(field, x0, d0, (0.0, 10.0), 0.01)?;
    for t in [1.0, 5.0, 10.0] {
        samples.push(probe.states()[(t / 0.01f64).round() as usize].clone());
    }

    let mut checks = Vec::new();
    let mut jac = Worst::new();
    let mut hess = Worst::new();
    let mut tors = Worst::new();
    let mut structure = Worst::new();
    let mut conn_id = Worst::new();
    let mut minus_two = Worst::new();
    let mut ym = Worst::new();
    let mut two_path = Worst::new();

    for (s, x) in samples.iter().enumerate() {
        let h = default_step(x);
        let j = field.jacobian(x)?;
        let j_fd = fd_jacobian(|z: &[f64]| field.eval(z), x, h)?;
        let (d, (a, b)) = scaled_diff(&j, &j_fd);
        jac.offer(d, || format!("sample {s}, J[{},{}]", a + 1, b + 1));

        let hs = field.hessians(x)?;
        for k in 0..x.len() {
            // d J / dx^k holds the Hessian slices H_i[., k].
            let dj = fd_partial_matrix(|z: &[f64]| field.jacobian(z), x, k, h)?;
            let want = Mat::from_fn(x.len(), |i, jj| hs[i][(jj, k)]);
            let (d, (a, b)) = scaled_diff(&want, &dj);
            hess.offer(d, || format!("sample {s}, H{}[{},{}]", a + 1, b + 1, k + 1));
        }

        let n_l = connection(field, x)?;
        let r = torsions(field, x)?;
        for (k, rk) in r.iter().enumerate() {
            let dn = fd_partial_matrix(|z: &[f64]| connection(field, z), x, k, h)?;
            let (d, (a, b)) = scaled_diff(rk, &dn);
            tors.offer(d, || format!("sample {s}, R{}[{},{}]", k + 1, a + 1, b + 1));
        }

        let n_h = hamilton::connection(field, x)?;
        let skew = n_l.checked_add(&n_l.transpose())?.max_abs();
        let asym = n_h.checked_sub(&n_h.transpose())?.max_abs();
        structure.offer(skew.max(asym), || format!("sample {s}"));

        let jt = j.transpose();
        let (d1, _) = scaled_diff(&n_l.scaled(-2.0), &j.checked_sub(&jt)?);
        let (d2, _) = scaled_diff(&n_h, &j.checked_add(&jt)?);
        conn_id.offer(d1.max(d2), || format!("sample {s}"));

        let r_h = hamilton::torsions(field, x)?;
        for (k, (a, b)) in r_h.iter().zip(&r).enumerate() {
            let (d, _) = scaled_diff(a, &b.scaled(-2.0));
            minus_two.offer(d, || format!("sample {s}, k = {}", k + 1));
        }

        let trace_form = yang_mills_from_connection(&n_l);
        let upper = yang_mills_upper_sum(&n_l);
        ym.offer((trace_form - upper).abs() / (1.0 + upper.abs()), || format!("sample {s}"));

        let tp = TangentPoint::on_shell(field, x)?;
        let e = first_invariant(field, &tp)?;
        let g = semispray(field, &tp)?;
        let ny = n_l.mul_vec(&tp.y)?;
        for i in 0..x.len() {
            let other = 2.0 * g[i] - ny[i];
            // scale by the magnitude of the summed terms
            let scale = 1.0 + e[i].abs() + 2.0 * g[i].abs() + ny[i].abs();
            two_path.offer((e[i] - other).abs() / scale, || format!("sample {s}, component {}", i + 1));
        }
    }
    checks.push(jac.finish("jacobian_vs_fd", FD_TOL));
    checks.push(hess.finish("hessian_vs_fd", FD_TOL));
    checks.push(tors.finish("torsion_vs_fd", FD_TOL));
    checks.push(structure.finish("connection_skew_symmetric", 0.0));
    checks.push(conn_id.finish("connection_identities", IDENTITY_TOL));
    checks.push(minus_two.finish("hamilton_torsion_minus_two", IDENTITY_TOL));
    checks.push(ym.finish("yang_mills_trace_identity", IDENTITY_TOL));
    checks.push(two_path.finish("first_invariant_two_path", IDENTITY_TOL));

    let rk4 = integrate_rk4(field, x0, d0, opts.t_span, opts.dt)?;
    let mut c = Worst::new();
    c.offer(rk4.conservation_drift(), || format!("rk4 dt = {}", opts.dt));
    checks.push(c.finish("conservation_rk4", CONSERVATION_TOL));

    let adaptive = integrate_adaptive(field, x0, d0, opts.t_span, &opts.adaptive)?;
    let mut c = Worst::new();
    c.offer(adaptive.conservation_drift(), || format!("{} steps", adaptive.len()));
    checks.push(c.finish("conservation_adaptive", CONSERVATION_TOL));

    checks.extend(euler_lagrange_checks(field, x0, d0)?);
    Ok(ValidationReport { checks })
}

/// Residual of `x'' + 2G` along RK4 solutions over one time unit, and its
/// second-order decay when the step is halved.
fn euler_lagrange_checks<F: VectorField>(field: &F, x0: &[f64], d0: f64) -> Result<Vec<CheckResult>> {
    let max_residual = |dt: f64| -> Result<(f64, String)> {
        let traj = integrate_rk4(field, x0, d0, (0.0, 1.0), dt)?;
        let res = euler_lagrange_residual(field, traj.times(), traj.states())?;
        let mut w = (0.0, "-".to_string());
        for (s, r) in res.iter().enumerate() {
            for (i, v) in r.iter().enumerate() {
                if v.abs() > w.0 {
                    w = (v.abs(), format!("t = {:.2}, component {}", traj.times()[s + 1], i + 1));
                }
            }
        }
        Ok(w)
    };
    let (r1, at) = max_residual(0.01)?;
    let (r2, _) = max_residual(0.005)?;
    let magnitude = x0.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    // residual tolerance stated for populations of order 1000
    let tol = EL_RESIDUAL_TOL * (magnitude / 1000.0).max(1.0);
    let mut out = vec![Worst {
        value: r1,
        detail: at,
    }
    .finish("euler_lagrange_residual", tol)];

    // Central second differences amplify rounding by 1/dt^2.
    let floor = 10.0 * f64::EPSILON * magnitude / (0.005 * 0.005);
    let order = if r2 <= floor {
        Worst {
            value: 0.0,
            detail: format!("below rounding floor ({r2:.1e})"),
        }
    } else {
        let ratio = r1 / r2;
        Worst {
            value: (ratio - 4.0).abs(),
            detail: format!("ratio {ratio:.3}"),
        }
    };
    out.push(order.finish("euler_lagrange_order", 1.0));
    Ok(out)
}

/// Checks needed by `geometry --check`: analytic vs finite-difference
/// derivatives at a single state.
pub fn pointwise_fd_checks<F: VectorField>(field: &F, x: &[f64]) -> Result<Vec<CheckResult>> {
    let h = default_step(x);
    let mut jac = Worst::new();
    let j = field.jacobian(x)?;
    let (d, (a, b)) = scaled_diff(&j, &fd_jacobian(|z: &[f64]| field.eval(z), x, h)?);
    jac.offer(d, || format!("J[{},{}]", a + 1, b + 1));

    let mut tors = Worst::new();
    let r = lagrange::torsions(field, x)?;
    for (k, rk) in r.iter().enumerate() {
        let dn = fd_partial_matrix(|z: &[f64]| connection(field, z), x, k, h)?;
        let (d, (a, b)) = scaled_diff(rk, &dn);
        tors.offer(d, || format!("R{}[{},{}]", k + 1, a + 1, b + 1));
    }

    let mut hess = Worst::new();
    let hs = field.hessians(x)?;
    for k in 0..x.len() {
        let dj = fd_partial_matrix(|z: &[f64]| field.jacobian(z), x, k, h)?;
        let want = Mat::from_fn(x.len(), |i, jj| hs[i][(jj, k)]);
        let (d, (a, b)) = scaled_diff(&want, &dj);
        hess.offer(d, || format!("H{}[{},{}]", a + 1, b + 1, k + 1));
    }
    Ok(vec![
        jac.finish("jacobian_vs_fd", FD_TOL),
        hess.finish("hessian_vs_fd", FD_TOL),
        tors.finish("torsion_vs_fd", FD_TOL),
    ])
}
