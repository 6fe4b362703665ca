//! Vector fields: the generic abstraction and the six-compartment
//! SEIR-type COVID-19 field with exact first and second derivatives.

use serde::{Deserialize, Serialize};

use crate::calculus;
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Compartment names in coordinate order.
pub const COMPARTMENTS: [&str; 6] = ["S", "E", "Is", "Ia", "Ih", "R"];

/// An autonomous vector field `X: R^n -> R^n`.
///
/// Implementors must supply `eval`; analytic derivatives are optional and
/// fall back to central finite differences from [`crate::calculus`].
pub trait VectorField: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// `J[i][j] = dX^i/dx^j`.
    fn jacobian(&self, x: &[f64]) -> Result<Mat> {
        calculus::fd_jacobian(|z| self.eval(z), x, calculus::default_step(x))
    }

    /// One symmetric Hessian per component: `H[k][(i, j)] = d2X^k/dx^i dx^j`.
    fn hessians(&self, x: &[f64]) -> Result<Vec<Mat>> {
        calculus::fd_hessians(|z| self.eval(z), x, calculus::default_step(x))
    }

    /// Rate at which mass leaves the modelled state (tracked as an auxiliary
    /// accumulator during integration). Zero unless overridden.
    fn loss_rate(&self, _x: &[f64]) -> Result<f64> {
        Ok(0.0)
    }
}

impl<T: VectorField + ?Sized> VectorField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).eval(x)
    }
    fn jacobian(&self, x: &[f64]) -> Result<Mat> {
        (**self).jacobian(x)
    }
    fn hessians(&self, x: &[f64]) -> Result<Vec<Mat>> {
        (**self).hessians(x)
    }
    fn loss_rate(&self, x: &[f64]) -> Result<f64> {
        (**self).loss_rate(x)
    }
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: x.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_finite(x: &[f64], context: &str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            context: context.to_string(),
        })
    }
}

/// Epidemiological rate constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub beta_s: f64,
    pub beta_a: f64,
    pub beta_h: f64,
    pub sigma: f64,
    /// Fraction of exposed individuals that become asymptomatic.
    pub r: f64,
    pub gamma_s: f64,
    pub gamma_a: f64,
    pub gamma_h: f64,
    pub phi_s: f64,
    pub delta_s: f64,
    pub delta_h: f64,
}

impl ModelParams {
    /// All rates finite and non-negative, `0 < r <= 1`.
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("beta_s", self.beta_s),
            ("beta_a", self.beta_a),
            ("beta_h", self.beta_h),
            ("sigma", self.sigma),
            ("gamma_s", self.gamma_s),
            ("gamma_a", self.gamma_a),
            ("gamma_h", self.gamma_h),
            ("phi_s", self.phi_s),
            ("delta_s", self.delta_s),
            ("delta_h", self.delta_h),
        ];
        for (name, v) in rates {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} must be finite and >= 0"
                )));
            }
        }
        if !(self.r > 0.0 && self.r <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "r = {} must satisfy 0 < r <= 1",
                self.r
            )));
        }
        Ok(())
    }
}

/// Compartment populations as they appear in JSON (`D` is optional).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompartmentState {
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "Is")]
    pub i_s: f64,
    #[serde(rename = "Ia")]
    pub i_a: f64,
    #[serde(rename = "Ih")]
    pub i_h: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "D", default)]
    pub d: f64,
}

impl CompartmentState {
    pub fn from_vector(x: &[f64], d: f64) -> Result<Self> {
        check_dim(6, x)?;
        Ok(CompartmentState {
            s: x[0],
            e: x[1],
            i_s: x[2],
            i_a: x[3],
            i_h: x[4],
            r: x[5],
            d,
        })
    }

    /// `(S, E, Is, Ia, Ih, R)`
    pub fn vector(&self) -> [f64; 6] {
        [self.s, self.e, self.i_s, self.i_a, self.i_h, self.r]
    }
}

/// The six-compartment field with coordinates `(S, E, Is, Ia, Ih, R)`.
///
/// The total population `N` is the plain sum of the coordinates and is
/// differentiated along with everything else.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovidModel {
    params: ModelParams,
    strict: bool,
}

/// Force-of-infection quantities shared by every derivative evaluation.
struct Infection {
    total: f64,
    /// `beta_s Is + beta_a Ia + beta_h Ih`
    pressure: f64,
    /// `pressure / N`
    lambda: f64,
    /// `d(pressure)/dx^j`
    dpressure: [f64; 6],
}

impl CovidModel {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(CovidModel {
            params,
            strict: false,
        })
    }

    /// Enables the non-negativity check on every compartment.
    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn total_population(x: &[f64]) -> f64 {
        x.iter().sum()
    }

    /// `delta_s Is + delta_h Ih`
    pub fn deceased_rate(&self, x: &[f64]) -> f64 {
        self.params.delta_s * x[2] + self.params.delta_h * x[4]
    }

    /// `(beta_s Is + beta_a Ia + beta_h Ih) / N`
    pub fn force_of_infection(&self, x: &[f64]) -> Result<f64> {
        Ok(self.infection(x)?.lambda)
    }

    fn infection(&self, x: &[f64]) -> Result<Infection> {
        check_dim(6, x)?;
        check_finite(x, "state vector")?;
        if self.strict {
            if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| **v < 0.0) {
                return Err(Error::NegativeCompartment { index, value });
            }
        }
        let total = Self::total_population(x);
        if total.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::DegeneratePopulation { total });
        }
        let p = &self.params;
        let pressure = p.beta_s * x[2] + p.beta_a * x[3] + p.beta_h * x[4];
        Ok(Infection {
            total,
            pressure,
            lambda: pressure / total,
            dpressure: [0.0, 0.0, p.beta_s, p.beta_a, p.beta_h, 0.0],
        })
    }

    /// `d(lambda S)/dx^j`, with `u = pressure * S` and `N` the coordinate sum:
    /// `u_j / N - u / N^2`.
    fn incidence_gradient(inf: &Infection, x: &[f64]) -> [f64; 6] {
        let s = x[0];
        let lambda_s_over_n = inf.lambda * s / inf.total;
        let mut g = [0.0; 6];
        for (j, gj) in g.iter_mut().enumerate() {
            let u_j_over_n = if j == 0 {
                inf.lambda
            } else {
                inf.dpressure[j] * s / inf.total
            };
            *gj = u_j_over_n - lambda_s_over_n;
        }
        g
    }
}

impl VectorField for CovidModel {
    fn dim(&self) -> usize {
        6
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let inf = self.infection(x)?;
        let p = &self.params;
        let (s, e, i_s, i_a, i_h) = (x[0], x[1], x[2], x[3], x[4]);
        let incidence = inf.lambda * s;
        Ok(vec![
            -incidence,
            incidence - p.sigma * e,
            (1.0 - p.r) * p.sigma * e - (p.phi_s + p.gamma_s + p.delta_s) * i_s,
            p.r * p.sigma * e - p.gamma_a * i_a,
            p.phi_s * i_s - (p.gamma_h + p.delta_h) * i_h,
            p.gamma_s * i_s + p.gamma_a * i_a + p.gamma_h * i_h,
        ])
    }

    fn jacobian(&self, x: &[f64]) -> Result<Mat> {
        let inf = self.infection(x)?;
        let p = &self.params;
        let g = Self::incidence_gradient(&inf, x);
        let mut j = Mat::zeros(6);
        for c in 0..6 {
            j[(0, c)] = -g[c];
            j[(1, c)] = g[c];
        }
        j[(1, 1)] -= p.sigma;
        j[(2, 1)] = (1.0 - p.r) * p.sigma;
        j[(2, 2)] = -(p.phi_s + p.gamma_s + p.delta_s);
        j[(3, 1)] = p.r * p.sigma;
        j[(3, 3)] = -p.gamma_a;
        j[(4, 2)] = p.phi_s;
        j[(4, 4)] = -(p.gamma_h + p.delta_h);
        j[(5, 2)] = p.gamma_s;
        j[(5, 3)] = p.gamma_a;
        j[(5, 4)] = p.gamma_h;
        Ok(j)
    }

    fn hessians(&self, x: &[f64]) -> Result<Vec<Mat>> {
        let inf = self.infection(x)?;
        let n = inf.total;
        let s = x[0];
        // u = pressure * S; u_j and u_ij as in incidence_gradient.
        let u = inf.pressure * s;
        let mut u_j = [0.0; 6];
        for (j, uj) in u_j.iter_mut().enumerate() {
            *uj = inf.dpressure[j] * s + if j == 0 { inf.pressure } else { 0.0 };
        }
        // d2(u/N)/dx^i dx^j = u_ij/N - (u_i + u_j)/N^2 + 2u/N^3
        let d2 = Mat::from_fn(6, |i, j| {
            let u_ij = if i == 0 { inf.dpressure[j] } else { 0.0 }
                + if j == 0 { inf.dpressure[i] } else { 0.0 };
            u_ij / n - (u_j[i] + u_j[j]) / (n * n) + 2.0 * u / (n * n * n)
        });
        let mut out = vec![Mat::zeros(6); 6];
        out[0] = d2.scaled(-1.0);
        out[1] = d2;
        Ok(out)
    }

    fn loss_rate(&self, x: &[f64]) -> Result<f64> {
        check_dim(6, x)?;
        Ok(self.deceased_rate(x))
    }
}

/// `X(x) = A x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearField {
    a: Mat,
}

impl LinearField {
    pub fn new(a: Mat) -> Self {
        LinearField { a }
    }

    pub fn matrix(&self) -> &Mat {
        &self.a
    }
}

impl VectorField for LinearField {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.a.mul_vec(x)
    }
    fn jacobian(&self, x: &[f64]) -> Result<Mat> {
        check_dim(self.a.dim(), x)?;
        Ok(self.a.clone())
    }
    fn hessians(&self, x: &[f64]) -> Result<Vec<Mat>> {
        check_dim(self.a.dim(), x)?;
        Ok(vec![Mat::zeros(self.a.dim()); self.a.dim()])
    }
}

/// The identically-zero field on `R^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroField(pub usize);

impl VectorField for ZeroField {
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.0, x)?;
        Ok(vec![0.0; self.0])
    }
    fn jacobian(&self, x: &[f64]) -> Result<Mat> {
        check_dim(self.0, x)?;
        Ok(Mat::zeros(self.0))
    }
    fn hessians(&self, x: &[f64]) -> Result<Vec<Mat>> {
        check_dim(self.0, x)?;
        Ok(vec![Mat::zeros(self.0); self.0])
    }
}

/// A field given only by its evaluator; all derivatives come from finite
/// differences.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x)?;
        (self.f)(x)
    }
}
