//! Eigenvalues of a general real matrix.
//!
//! Balancing, Householder reduction to upper Hessenberg form, then the
//! Francis implicit double-shift QR iteration (the EISPACK `hqr` scheme).

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeMap, SerializeSeq, Serializer};

use super::Mat;
use crate::error::{Error, Result};

pub const DEFAULT_EIGEN_TOL: f64 = 1e-10;

const MAX_ITS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues sorted by descending real part, ties by descending
/// imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    eigenvalues: Vec<Complex64>,
}

impl ComplexSpectrum {
    fn from_unsorted(mut eigenvalues: Vec<Complex64>) -> Self {
        eigenvalues.sort_by(|a, b| {
            b.re.partial_cmp(&a.re)
                .unwrap_or(Ordering::Equal)
                .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
        });
        ComplexSpectrum { eigenvalues }
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest real part; `-inf` for an empty spectrum.
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues
            .first()
            .map(|z| z.re)
            .unwrap_or(f64::NEG_INFINITY)
    }

    pub fn sum(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }

    pub fn product(&self) -> Complex64 {
        self.eigenvalues.iter().product()
    }
}

struct ReIm<'a>(&'a Complex64);

impl Serialize for ReIm<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("re", &self.0.re)?;
        map.serialize_entry("im", &self.0.im)?;
        map.end()
    }
}

impl Serialize for ComplexSpectrum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.eigenvalues.len()))?;
        for z in &self.eigenvalues {
            seq.serialize_element(&ReIm(z))?;
        }
        seq.end()
    }
}

/// All eigenvalues of `a` (with algebraic multiplicity).
///
/// `tol` is the relative tolerance of the final consistency check: the sum of
/// the computed eigenvalues must reproduce `trace(a)` to within
/// `tol * n * (1 + |a|_F)`. Failure of the QR iteration to deflate within the
/// iteration budget is reported as [`Error::EigenNonConvergence`].
pub fn eigenvalues(a: &Mat, tol: f64) -> Result<ComplexSpectrum> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite {
            context: "eigenvalue input".into(),
        });
    }

    let mut h: Vec<f64> = a.as_slice().to_vec();
    balance(&mut h, n);
    reduce_to_hessenberg(&mut h, n);
    let roots = hessenberg_qr(&mut h, n)?;

    let spectrum = ComplexSpectrum::from_unsorted(roots);
    let scale = 1.0 + a.frobenius_norm();
    let residual = (spectrum.sum().re - a.trace()).abs();
    if residual > tol.max(f64::EPSILON) * n as f64 * scale {
        return Err(Error::EigenInconsistent { residual });
    }
    Ok(spectrum)
}

/// Parlett-Reinsch balancing by powers of two (exact similarity).
fn balance(a: &mut [f64], n: usize) {
    const RADIX: f64 = 2.0;
    const SQRDX: f64 = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j * n + i].abs();
                    r += a[i * n + j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= SQRDX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= SQRDX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[i * n + j] *= g;
                }
                for j in 0..n {
                    a[j * n + i] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Orthogonal (Householder) similarity reduction to upper Hessenberg form.
fn reduce_to_hessenberg(a: &mut [f64], n: usize) {
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    for m in 1..n - 1 {
        let scale: f64 = (m..n).map(|i| a[i * n + m - 1].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in (m..n).rev() {
            ort[i] = a[i * n + m - 1] / scale;
            h += ort[i] * ort[i];
        }
        let g = if ort[m] > 0.0 { -h.sqrt() } else { h.sqrt() };
        h -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let f = (m..n).map(|i| ort[i] * a[i * n + j]).sum::<f64>() / h;
            for i in m..n {
                a[i * n + j] -= f * ort[i];
            }
        }
        for i in 0..n {
            let f = (m..n).map(|j| ort[j] * a[i * n + j]).sum::<f64>() / h;
            for j in m..n {
                a[i * n + j] -= f * ort[j];
            }
        }
        a[m * n + m - 1] = scale * g;
        for i in m + 1..n {
            a[i * n + m - 1] = 0.0;
        }
    }
}

#[inline]
fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (destroyed).
fn hessenberg_qr(a: &mut [f64], n: usize) -> Result<Vec<Complex64>> {
    let eps = f64::EPSILON;
    let at = |i: isize, j: isize| (i as usize) * n + j as usize;

    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i * n + j].abs();
        }
    }

    let mut nn = n as isize - 1;
    let mut t = 0.0;
    let mut total_its = 0usize;
    let (mut p, mut q, mut r) = (0.0f64, 0.0f64, 0.0f64);
    let (mut x, mut y, mut z, mut w);

    while nn >= 0 {
        let mut its = 0usize;
        loop {
            // Look for a single small subdiagonal element.
            let mut l = nn;
            while l >= 1 {
                let mut s = a[at(l - 1, l - 1)].abs() + a[at(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[at(l, l - 1)].abs() <= eps * s {
                    a[at(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[at(nn, nn)];
            if l == nn {
                // One root found.
                wr[nn as usize] = x + t;
                wi[nn as usize] = 0.0;
                nn -= 1;
                break;
            }
            y = a[at(nn - 1, nn - 1)];
            w = a[at(nn, nn - 1)] * a[at(nn - 1, nn)];
            if l == nn - 1 {
                // Two roots found.
                p = 0.5 * (y - x);
                q = p * p + w;
                z = q.abs().sqrt();
                x += t;
                let (i0, i1) = ((nn - 1) as usize, nn as usize);
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[i0] = x + z;
                    wr[i1] = x + z;
                    if z != 0.0 {
                        wr[i1] = x - w / z;
                    }
                    wi[i0] = 0.0;
                    wi[i1] = 0.0;
                } else {
                    wr[i0] = x + p;
                    wr[i1] = x + p;
                    wi[i0] = z;
                    wi[i1] = -z;
                }
                nn -= 2;
                break;
            }

            if its >= MAX_ITS_PER_EIGENVALUE {
                return Err(Error::EigenNonConvergence {
                    iterations: total_its,
                });
            }
            if its > 0 && its % 10 == 0 {
                // Exceptional shift.
                t += x;
                for i in 0..=nn {
                    a[at(i, i)] -= x;
                }
                let s = a[at(nn, nn - 1)].abs() + a[at(nn - 1, nn - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            total_its += 1;

            // Form shift and look for two consecutive small subdiagonal
            // elements.
            let mut m = nn - 2;
            while m >= l {
                z = a[at(m, m)];
                r = x - z;
                let s = y - z;
                p = (r * s - w) / a[at(m + 1, m)] + a[at(m, m + 1)];
                q = a[at(m + 1, m + 1)] - z - r - s;
                r = a[at(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[at(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs()
                    * (a[at(m - 1, m - 1)].abs() + z.abs() + a[at(m + 1, m + 1)].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[at(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[at(i, i - 3)] = 0.0;
                }
            }

            // Double QR step on rows l..nn and columns m..nn.
            let mut k = m;
            while k <= nn - 1 {
                if k != m {
                    p = a[at(k, k - 1)];
                    q = a[at(k + 1, k - 1)];
                    r = 0.0;
                    if k + 1 != nn {
                        r = a[at(k + 2, k - 1)];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                } else {
                    x = 0.0;
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[at(k, k - 1)] = -a[at(k, k - 1)];
                        }
                    } else {
                        a[at(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let mut pp = a[at(k, j)] + q * a[at(k + 1, j)];
                        if k + 1 != nn {
                            pp += r * a[at(k + 2, j)];
                            a[at(k + 2, j)] -= pp * z;
                        }
                        a[at(k + 1, j)] -= pp * y;
                        a[at(k, j)] -= pp * x;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * a[at(i, k)] + y * a[at(i, k + 1)];
                        if k + 1 != nn {
                            pp += z * a[at(i, k + 2)];
                            a[at(i, k + 2)] -= pp * r;
                        }
                        a[at(i, k + 1)] -= pp * q;
                        a[at(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }

    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}
