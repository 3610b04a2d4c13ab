//! Recurrence polynomials of `T` and the polynomial `P` with `Q = pi_1 P(T)`.
//!
//! `T` restricted to the time window is an unreduced Jacobi matrix, so its
//! eigenvector components are polynomials in the eigenvalue:
//! `R_i(t_l) = <i|t_l> / <0|t_l>`. Index `i` is the storage index, which for
//! the antisymmetric sector is the position label `i + 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::core_model::ModelParams;
use crate::error::{Error, Result};
use crate::operators::{heun_tb, max_modulus, projector_time, tb_operator, DenseOperator, TridiagonalOperator};
use crate::spectral::joint_spectrum;

/// Pass threshold for [`verify_q_equals_pi_p`] within the supported range.
pub const OPERATOR_IDENTITY_TOL: f64 = 1e-7;

/// Real polynomial with monomial coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Polynomial::new(vec![0.0, 1.0])
    }

    /// Degree, with the zero polynomial given degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().expect("never empty")
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    fn scaled(&self, k: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    fn shifted_up(&self) -> Polynomial {
        let mut c = vec![0.0];
        c.extend_from_slice(&self.coeffs);
        Polynomial::new(c)
    }

    fn plus(&self, other: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new(
            (0..len)
                .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + other.coeffs.get(i).unwrap_or(&0.0))
                .collect(),
        )
    }
}

fn window(p: &ModelParams) -> (TridiagonalOperator, usize) {
    (heun_tb(p), p.time_rank())
}

fn check_step(t: &TridiagonalOperator, step: usize) -> Result<f64> {
    let a = t.offdiag[step];
    if a == 0.0 || !a.is_finite() {
        return Err(Error::DegenerateRecurrence { step });
    }
    Ok(a)
}

/// `R_0 .. R_{r-1}` with `r` the rank of the time projector.
pub fn recurrence_polys(p: &ModelParams) -> Result<Vec<Polynomial>> {
    let (t, size) = window(p);
    let mut out: Vec<Polynomial> = Vec::with_capacity(size);
    if size == 0 {
        return Ok(out);
    }
    out.push(Polynomial::constant(1.0));
    for i in 0..size - 1 {
        let a = check_step(&t, i)?;
        let mut next = out[i].shifted_up().plus(&out[i].scaled(-t.diag[i]));
        if i > 0 {
            next = next.plus(&out[i - 1].scaled(-t.offdiag[i - 1]));
        }
        out.push(next.scaled(1.0 / a));
    }
    Ok(out)
}

/// `R_0(x) .. R_{r-1}(x)` in double-double arithmetic, plus the value of
/// the characteristic function `(x - b_{r-1}) R_{r-1} - a_{r-2} R_{r-2}`,
/// whose zeros are the eigenvalues of the window. With `deriv` the
/// derivatives are carried along.
fn recurrence_dd(t: &TridiagonalOperator, size: usize, x: TwoFloat) -> Result<(Vec<TwoFloat>, Vec<TwoFloat>, TwoFloat, TwoFloat)> {
    let zero = TwoFloat::from(0.0);
    let mut r = vec![TwoFloat::from(1.0)];
    let mut dr = vec![zero];
    for i in 0..size {
        let prev = if i > 0 { r[i - 1] * t.offdiag[i - 1] } else { zero };
        let dprev = if i > 0 { dr[i - 1] * t.offdiag[i - 1] } else { zero };
        let shift = x - t.diag[i];
        let next = shift * r[i] - prev;
        let dnext = r[i] + shift * dr[i] - dprev;
        if i + 1 == size {
            return Ok((r, dr, next, dnext));
        }
        let a = check_step(t, i)?;
        r.push(next / a);
        dr.push(dnext / a);
    }
    Ok((Vec::new(), Vec::new(), zero, zero))
}

/// Values `R_0(x) .. R_{r-1}(x)` straight from the three-term recurrence.
/// The recurrence runs in double-double arithmetic: at large `L` it
/// cancels heavily and loses up to ten digits in plain `f64`.
pub fn recurrence_values(p: &ModelParams, x: f64) -> Result<Vec<f64>> {
    let (t, size) = window(p);
    let (r, _, _, _) = recurrence_dd(&t, size, TwoFloat::from(x))?;
    Ok(r.into_iter().map(f64::from).collect())
}

/// First row of `Q` over the time window: the weights of `P` in the `R_i`.
fn link_weights(p: &ModelParams) -> Vec<f64> {
    let q = tb_operator(p);
    (0..p.time_rank()).map(|i| q.matrix()[(0, i)].re).collect()
}

/// `P = sum_i <first|Q|i> R_i`, where `first` is the lowest kept label.
pub fn assemble_p(p: &ModelParams) -> Result<Polynomial> {
    let polys = recurrence_polys(p)?;
    let w = link_weights(p);
    Ok(polys
        .iter()
        .zip(w)
        .fold(Polynomial::constant(0.0), |acc, (r, wi)| acc.plus(&r.scaled(wi))))
}

fn p_dd(weights: &[f64], r: &[TwoFloat]) -> f64 {
    let sum = r
        .iter()
        .zip(weights)
        .fold(TwoFloat::from(0.0), |acc, (&ri, &w)| acc + ri * w);
    f64::from(sum)
}

/// `P(x)` through the recurrence, without forming monomial coefficients.
pub fn eval_p_stable(p: &ModelParams, x: f64) -> Result<f64> {
    let (t, size) = window(p);
    let (r, _, _, _) = recurrence_dd(&t, size, TwoFloat::from(x))?;
    Ok(p_dd(&link_weights(p), &r))
}

/// Newton steps on the characteristic function, in double-double, from an
/// eigenvalue accurate to `f64` precision.
fn refine_eigenvalue(t: &TridiagonalOperator, size: usize, guess: f64) -> Result<TwoFloat> {
    let mut x = TwoFloat::from(guess);
    for _ in 0..4 {
        let (_, _, f, df) = recurrence_dd(t, size, x)?;
        if f64::from(df) == 0.0 {
            break;
        }
        let step = f / df;
        x -= step;
        if f64::from(step).abs() <= 1e-30 * (1.0 + f64::from(x).abs()) {
            break;
        }
    }
    Ok(x)
}

/// `P(t)` at an eigenvalue `t` of the window. `P` has slopes up to about
/// `1e10` there at large `L`, so `t` is first refined beyond `f64`
/// precision; evaluating at the rounded `t` would measure that rounding.
pub fn eval_p_at_eigenvalue(p: &ModelParams, t_value: f64) -> Result<f64> {
    let (t, size) = window(p);
    p_at_refined(&t, size, &link_weights(p), t_value)
}

/// `R_0(t) .. R_{r-1}(t)` at an eigenvalue `t` of the window, refined as in
/// [`eval_p_at_eigenvalue`]. These are the eigenvector ratios `v_j / v_0`;
/// components that decay along the window amplify any error in `t`.
pub fn recurrence_at_eigenvalue(p: &ModelParams, t_value: f64) -> Result<Vec<f64>> {
    let (t, size) = window(p);
    let x = refine_eigenvalue(&t, size, t_value)?;
    let (r, _, _, _) = recurrence_dd(&t, size, x)?;
    Ok(r.into_iter().map(f64::from).collect())
}

fn p_at_refined(t: &TridiagonalOperator, size: usize, weights: &[f64], t_value: f64) -> Result<f64> {
    let x = refine_eigenvalue(t, size, t_value)?;
    let (r, _, _, _) = recurrence_dd(t, size, x)?;
    Ok(p_dd(weights, &r))
}

/// `max_l |P(t_l) - q_l|` over the joint modes.
pub fn eigenbasis_residual(p: &ModelParams) -> Result<f64> {
    let (t, size) = window(p);
    let weights = link_weights(p);
    let mut worst = 0.0f64;
    for mode in joint_spectrum(p)? {
        worst = worst.max((p_at_refined(&t, size, &weights, mode.t)? - mode.q).abs());
    }
    Ok(worst)
}

/// Horner evaluation of `poly` at the matrix `t`.
pub fn eval_poly_on_operator(poly: &Polynomial, t: &DenseOperator) -> DenseOperator {
    let d = t.dim();
    let id = DMatrix::<Complex64>::identity(d, d);
    let m = poly
        .coeffs
        .iter()
        .rev()
        .fold(DMatrix::<Complex64>::zeros(d, d), |acc, &c| {
            acc * t.matrix() + &id * Complex64::new(c, 0.0)
        });
    DenseOperator::from_matrix(m, t.basis())
}

/// `P(T)` by running the recurrence on matrices: `R_{i+1}(T)` from
/// `R_i(T)` and `R_{i-1}(T)`. Avoids the monomial coefficients entirely and
/// works in double-double, like [`recurrence_values`].
fn p_of_t_stable(p: &ModelParams) -> Result<DMatrix<f64>> {
    let (t, size) = window(p);
    let d = p.dim();
    let w = link_weights(p);
    let zero = TwoFloat::from(0.0);
    let mut acc = vec![zero; d * d];
    if size == 0 {
        return Ok(DMatrix::zeros(d, d));
    }
    let idx = |i: usize, j: usize| i * d + j;
    let mut prev = vec![zero; d * d];
    let mut cur = vec![zero; d * d];
    for i in 0..d {
        cur[idx(i, i)] = TwoFloat::from(1.0);
    }
    for (a, c) in acc.iter_mut().zip(&cur) {
        *a += *c * w[0];
    }
    for step in 0..size - 1 {
        let a = check_step(&t, step)?;
        let mut next = vec![zero; d * d];
        for i in 0..d {
            for j in 0..d {
                // (T cur)_{ij} with T tridiagonal
                let mut v = cur[idx(i, j)] * TwoFloat::new_sub(t.diag[i], t.diag[step]);
                if i > 0 {
                    v += cur[idx(i - 1, j)] * t.offdiag[i - 1];
                }
                if i + 1 < d {
                    v += cur[idx(i + 1, j)] * t.offdiag[i];
                }
                if step > 0 {
                    v -= prev[idx(i, j)] * t.offdiag[step - 1];
                }
                next[idx(i, j)] = v / a;
            }
        }
        for (acc_ij, n_ij) in acc.iter_mut().zip(&next) {
            *acc_ij += *n_ij * w[step + 1];
        }
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(DMatrix::from_fn(d, d, |i, j| f64::from(acc[idx(i, j)])))
}

/// Residuals of `Q = pi_1 P(T)` by both evaluation routes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolymapReport {
    /// `||Q - pi_1 P(T)||_max` with `P(T)` built from the recurrence.
    pub recurrence: f64,
    /// The same with `P(T)` from the monomial coefficients by Horner.
    pub monomial: f64,
    /// `||P_recurrence(T) - P_monomial(T)||_max` on the time window.
    pub discrepancy: f64,
}

pub fn polymap_report(p: &ModelParams) -> Result<PolymapReport> {
    let q = tb_operator(p).real_part();
    let pi1 = projector_time(p).real_part();
    let stable = &pi1 * p_of_t_stable(p)?;
    let poly = assemble_p(p)?;
    let t = heun_tb(p).to_dense();
    let mono = &pi1 * eval_poly_on_operator(&poly, &t).real_part();
    let as_c = |m: DMatrix<f64>| m.map(|x| Complex64::new(x, 0.0));
    let report = PolymapReport {
        recurrence: max_modulus(&as_c(&q - &stable)),
        monomial: max_modulus(&as_c(&q - &mono)),
        discrepancy: max_modulus(&as_c(&stable - &mono)),
    };
    if report.discrepancy > OPERATOR_IDENTITY_TOL {
        log::warn!(
            "monomial and recurrence evaluations of P differ by {:e} at {:?}",
            report.discrepancy,
            p
        );
    }
    Ok(report)
}

/// `||Q - pi_1 P(T)||_max` via the stable recurrence route.
pub fn verify_q_equals_pi_p(p: &ModelParams) -> Result<f64> {
    let q = tb_operator(p).real_part();
    let pi1 = projector_time(p).real_part();
    Ok((q - pi1 * p_of_t_stable(p)?).amax())
}
