//! Time integration of `x' = X(x)` together with the auxiliary accumulator
//! `D' = loss_rate(x)` (the deceased compartment for the COVID model).
//!
//! The accumulator is integrated as part of the state so that the linear
//! invariant `sum(x) + D` is preserved pointwise by both schemes. Negative
//! compartments are never clamped.

use std::io::{self, Write};

use log::warn;

use crate::error::{Error, Result};
use crate::model::{check_dim, check_finite, VectorField};

/// Time-stamped states plus the accumulated loss `D(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    deceased: Vec<f64>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn deceased(&self) -> &[f64] {
        &self.deceased
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `sum(x)` at sample `i`.
    pub fn population(&self, i: usize) -> f64 {
        self.states[i].iter().sum()
    }

    /// Largest `|(N + D)(t) - (N + D)(t0)| / |(N + D)(t0)|` over the samples.
    pub fn conservation_drift(&self) -> f64 {
        let invariant = |i: usize| self.population(i) + self.deceased[i];
        let c0 = invariant(0);
        let scale = c0.abs().max(f64::MIN_POSITIVE);
        (0..self.len())
            .map(|i| (invariant(i) - c0).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// Smallest compartment value over the whole trajectory.
    pub fn min_component(&self) -> f64 {
        self.states
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    fn warn_if_negative(&self) {
        if self.is_empty() {
            return;
        }
        let floor = -1e-9 * self.population(0).abs();
        let min = self.min_component();
        if min < floor {
            warn!("compartment went negative during integration (min = {min:e})");
        }
    }
}

/// Optional per-sample geometry columns of the trajectory CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySample {
    pub yang_mills: f64,
    pub max_real_part: f64,
    pub class: crate::kcc::JacobiClass,
}

pub const CSV_HEADER: &str = "t,S,E,Is,Ia,Ih,R,D,Ntot,EYM,max_re_P,jacobi_class";

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the trajectory CSV. Geometry columns are left empty when
/// `geometry` is `None`.
pub fn write_csv<W: Write>(
    out: &mut W,
    traj: &Trajectory,
    geometry: Option<&[GeometrySample]>,
) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for i in 0..traj.len() {
        let mut fields: Vec<String> = Vec::with_capacity(12);
        fields.push(fmt_f64(traj.times[i]));
        fields.extend(traj.states[i].iter().map(|v| fmt_f64(*v)));
        fields.push(fmt_f64(traj.deceased[i]));
        fields.push(fmt_f64(traj.population(i)));
        match geometry.and_then(|g| g.get(i)) {
            Some(g) => {
                fields.push(fmt_f64(g.yang_mills));
                fields.push(fmt_f64(g.max_real_part));
                fields.push(g.class.to_string());
            }
            None => fields.extend(["".to_string(), "".to_string(), "".to_string()]),
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Augmented right-hand side `(X(x), loss_rate(x))`.
fn augmented<F: VectorField>(field: &F, z: &[f64], t: f64) -> Result<Vec<f64>> {
    let n = field.dim();
    let x = &z[..n];
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integration {
            t,
            reason: "non-finite state".into(),
        });
    }
    let wrap = |e: Error| Error::Integration {
        t,
        reason: e.to_string(),
    };
    let mut dz = field.eval(x).map_err(wrap)?;
    dz.push(field.loss_rate(x).map_err(wrap)?);
    if dz.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integration {
            t,
            reason: "non-finite derivative".into(),
        });
    }
    Ok(dz)
}

fn axpy(z: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = z.to_vec();
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += h * c * v;
        }
    }
    out
}

fn check_start<F: VectorField>(field: &F, x0: &[f64], d0: f64, t_span: (f64, f64)) -> Result<()> {
    check_dim(field.dim(), x0)?;
    check_finite(x0, "initial state")?;
    if !d0.is_finite() {
        return Err(Error::NonFinite {
            context: "initial accumulator".into(),
        });
    }
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::InvalidParameter(format!(
            "time span must satisfy t1 > t0, got ({t0}, {t1})"
        )));
    }
    Ok(())
}

fn split(z: Vec<f64>, n: usize) -> (Vec<f64>, f64) {
    let d = z[n];
    let mut x = z;
    x.truncate(n);
    (x, d)
}

/// Number of uniform steps of size `dt` covering `span`; a final partial
/// step is used when `span / dt` is not (numerically) an integer.
pub fn uniform_step_count(span: f64, dt: f64) -> usize {
    let ratio = span / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest.max(1.0) as usize
    } else {
        ratio.ceil() as usize
    }
}

/// `t0, t0 + dt, ..` ending exactly at `t1`; the sample times of
/// [`integrate_rk4`].
pub fn uniform_times(t_span: (f64, f64), dt: f64) -> Vec<f64> {
    let (t0, t1) = t_span;
    let steps = uniform_step_count(t1 - t0, dt);
    (0..=steps)
        .map(|i| if i == steps { t1 } else { t0 + i as f64 * dt })
        .collect()
}

/// Classic fourth-order Runge-Kutta with a fixed step.
pub fn integrate_rk4<F: VectorField>(
    field: &F,
    x0: &[f64],
    d0: f64,
    t_span: (f64, f64),
    dt: f64,
) -> Result<Trajectory> {
    check_start(field, x0, d0, t_span)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    let n = field.dim();
    let times = uniform_times(t_span, dt);
    let steps = times.len() - 1;

    let mut z: Vec<f64> = x0.iter().copied().chain(std::iter::once(d0)).collect();
    // Fail early on an invalid starting point.
    augmented(field, &z, t_span.0)?;

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        deceased: Vec::with_capacity(steps + 1),
    };
    traj.times.push(times[0]);
    traj.states.push(x0.to_vec());
    traj.deceased.push(d0);

    let mut t = times[0];
    for &t_next in &times[1..] {
        let h = t_next - t;
        z = rk4_step(field, &z, t, h)?;
        t = t_next;
        let (x, d) = split(z.clone(), n);
        traj.times.push(t);
        traj.states.push(x);
        traj.deceased.push(d);
    }
    traj.warn_if_negative();
    Ok(traj)
}

fn rk4_step<F: VectorField>(field: &F, z: &[f64], t: f64, h: f64) -> Result<Vec<f64>> {
    let k1 = augmented(field, z, t)?;
    let k2 = augmented(field, &axpy(z, 0.5 * h, &[(1.0, &k1)]), t + 0.5 * h)?;
    let k3 = augmented(field, &axpy(z, 0.5 * h, &[(1.0, &k2)]), t + 0.5 * h)?;
    let k4 = augmented(field, &axpy(z, h, &[(1.0, &k3)]), t + h)?;
    Ok(axpy(
        z,
        h / 6.0,
        &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)],
    ))
}

/// Settings for [`integrate_adaptive`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Output times (sorted, inside the span). `None` records every accepted
    /// step.
    pub sample_times: Option<Vec<f64>>,
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            sample_times: None,
            max_steps: 1_000_000,
        }
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// Quartic correction of the continuous extension; its weight
// theta^2 (1 - theta)^2 is the gap to the cubic Hermite interpolant.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Embedded Dormand-Prince 5(4) with local extrapolation, PI-free
/// step control on the mixed RMS error norm, and cubic Hermite dense output
/// at the requested sample times.
pub fn integrate_adaptive<F: VectorField>(
    field: &F,
    x0: &[f64],
    d0: f64,
    t_span: (f64, f64),
    opts: &AdaptiveOptions,
) -> Result<Trajectory> {
    check_start(field, x0, d0, t_span)?;
    if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
        return Err(Error::InvalidParameter(
            "tolerances must be > 0".to_string(),
        ));
    }
    let (t0, t1) = t_span;
    if let Some(samples) = &opts.sample_times {
        let sorted = samples.windows(2).all(|w| w[0] < w[1]);
        let inside = samples.iter().all(|t| *t >= t0 && *t <= t1);
        if !sorted || !inside {
            return Err(Error::InvalidParameter(
                "sample times must be strictly increasing and inside the span".into(),
            ));
        }
    }
    let n = field.dim();
    let span = t1 - t0;
    let h_min = 1e-12 * span;

    let mut z: Vec<f64> = x0.iter().copied().chain(std::iter::once(d0)).collect();
    let mut f = augmented(field, &z, t0)?;

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        deceased: Vec::new(),
    };
    let push = |traj: &mut Trajectory, t: f64, z: Vec<f64>| {
        let (x, d) = split(z, n);
        traj.times.push(t);
        traj.states.push(x);
        traj.deceased.push(d);
    };

    let mut next_sample = 0usize;
    match &opts.sample_times {
        None => push(&mut traj, t0, z.clone()),
        Some(samples) => {
            while next_sample < samples.len() && samples[next_sample] == t0 {
                push(&mut traj, t0, z.clone());
                next_sample += 1;
            }
        }
    }

    let mut t = t0;
    let mut h = initial_step(field, &z, &f, t0, span, opts)?;
    let mut steps = 0usize;
    while t < t1 {
        if steps >= opts.max_steps {
            return Err(Error::Integration {
                t,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        steps += 1;
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }

        let (z_new, f_new, err) = dp_step(field, &z, &f, t, h, opts)?;
        if err <= 1.0 {
            let t_new = if last { t1 } else { t + h };
            match &opts.sample_times {
                None => push(&mut traj, t_new, z_new.clone()),
                Some(samples) => {
                    while next_sample < samples.len() && samples[next_sample] <= t_new {
                        let s = (samples[next_sample] - t) / (t_new - t);
                        push(
                            &mut traj,
                            samples[next_sample],
                            hermite(&z, &f, &z_new, &f_new, t_new - t, s),
                        );
                        next_sample += 1;
                    }
                }
            }
            t = t_new;
            z = z_new;
            f = f_new;
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(span);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            if h < h_min {
                return Err(Error::StepUnderflow { t, h, h_min });
            }
        }
    }
    traj.warn_if_negative();
    Ok(traj)
}

fn error_norm(z: &[f64], z_new: &[f64], err: &[f64], opts: &AdaptiveOptions) -> f64 {
    let sum: f64 = err
        .iter()
        .zip(z.iter().zip(z_new))
        .map(|(e, (a, b))| {
            let sc = opts.abs_tol + opts.rel_tol * a.abs().max(b.abs());
            (e / sc) * (e / sc)
        })
        .sum();
    (sum / err.len() as f64).sqrt()
}

fn initial_step<F: VectorField>(
    field: &F,
    z: &[f64],
    f: &[f64],
    t0: f64,
    span: f64,
    opts: &AdaptiveOptions,
) -> Result<f64> {
    let scale = |v: &[f64]| -> f64 {
        let s: f64 = v
            .iter()
            .zip(z)
            .map(|(v, z)| {
                let sc = opts.abs_tol + opts.rel_tol * z.abs();
                (v / sc) * (v / sc)
            })
            .sum();
        (s / v.len() as f64).sqrt()
    };
    let d0 = scale(z);
    let d1 = scale(f);
    if d1 == 0.0 {
        return Ok(span);
    }
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6 * span
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let z1 = axpy(z, h0, &[(1.0, f)]);
    let f1 = augmented(field, &z1, t0 + h0)?;
    let df: Vec<f64> = f1.iter().zip(f).map(|(a, b)| (a - b) / h0).collect();
    let d2 = scale(&df);
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6 * span)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

type StepResult = (Vec<f64>, Vec<f64>, f64);

fn dp_step<F: VectorField>(
    field: &F,
    z: &[f64],
    k1: &[f64],
    t: f64,
    h: f64,
    opts: &AdaptiveOptions,
) -> Result<StepResult> {
    let k2 = augmented(field, &axpy(z, h, &[(A2[0], k1)]), t + C[1] * h)?;
    let k3 = augmented(field, &axpy(z, h, &[(A3[0], k1), (A3[1], &k2)]), t + C[2] * h)?;
    let k4 = augmented(
        field,
        &axpy(z, h, &[(A4[0], k1), (A4[1], &k2), (A4[2], &k3)]),
        t + C[3] * h,
    )?;
    let k5 = augmented(
        field,
        &axpy(z, h, &[(A5[0], k1), (A5[1], &k2), (A5[2], &k3), (A5[3], &k4)]),
        t + C[4] * h,
    )?;
    let k6 = augmented(
        field,
        &axpy(
            z,
            h,
            &[(A6[0], k1), (A6[1], &k2), (A6[2], &k3), (A6[3], &k4), (A6[4], &k5)],
        ),
        t + C[5] * h,
    )?;
    let ks: [&[f64]; 6] = [k1, &k2, &k3, &k4, &k5, &k6];
    let terms: Vec<(f64, &[f64])> = B5[..6].iter().copied().zip(ks).collect();
    let z_new = axpy(z, h, &terms);
    let k7 = augmented(field, &z_new, t + h)?;

    let all: [&[f64]; 7] = [k1, &k2, &k3, &k4, &k5, &k6, &k7];
    let err: Vec<f64> = (0..z.len())
        .map(|i| {
            h * (0..7)
                .map(|s| (B5[s] - B4[s]) * all[s][i])
                .sum::<f64>()
        })
        .collect();
    let norm = error_norm(z, &z_new, &err, opts);
    // Dense output is cubic Hermite, so its midpoint defect is controlled too.
    let corr = dense_correction(h, &all);
    let mid_defect: Vec<f64> = corr.iter().map(|c| c / 16.0).collect();
    let dense = error_norm(z, &z_new, &mid_defect, opts);
    Ok((z_new, k7, norm.max(dense)))
}

fn dense_correction(h: f64, ks: &[&[f64]; 7]) -> Vec<f64> {
    (0..ks[0].len())
        .map(|i| h * (0..7).map(|s| D[s] * ks[s][i]).sum::<f64>())
        .collect()
}

/// Cubic Hermite interpolant on `[t, t + h]` at fraction `s`.
fn hermite(z0: &[f64], f0: &[f64], z1: &[f64], f1: &[f64], h: f64, s: f64) -> Vec<f64> {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    (0..z0.len())
        .map(|i| h00 * z0[i] + h10 * h * f0[i] + h01 * z1[i] + h11 * h * f1[i])
        .collect()
}
