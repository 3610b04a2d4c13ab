//! Dynamical operators `D(u, m)`, `B(u, m)` and Bethe-ansatz diagonalization
//! of the Heun operator on the time window.
//!
//! A Bethe state is an ordered product of `B` factors applied to the lowest
//! position vector. Its roots solve the Bethe equations exactly when the
//! state is an eigenvector of `T`, and the eigenvalue formula `t(u)` is then
//! independent of `u`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core_model::{ModelParams, Parity, SignalVector};
use crate::error::{Error, Result};
use crate::operators::{heun_tb, leonard_pair, max_modulus, DenseOperator};
use crate::spectral::eig_sym_tridiag;

/// Denominators smaller than this in modulus are reported as poles.
pub const POLE_TOL: f64 = 1e-12;

/// Solver candidates closer than this to a pole or to another root are dropped.
pub const EXCLUSION_TOL: f64 = 1e-6;

/// Largest spread of `t(u)` over the sample points for an accepted root set.
pub const U_SPREAD_TOL: f64 = 1e-8;

/// Number of `u` samples used to test `u`-independence.
pub const U_SAMPLE_COUNT: usize = 7;

/// Generic spectral parameters; the first [`U_SAMPLE_COUNT`] that avoid the
/// poles of a given root set are used.
const U_SAMPLES: [Complex64; 12] = [
    Complex64::new(0.31, 0.17),
    Complex64::new(0.77, -0.23),
    Complex64::new(1.29, 0.05),
    Complex64::new(-0.53, 0.41),
    Complex64::new(2.11, -0.13),
    Complex64::new(0.47, 0.61),
    Complex64::new(1.73, 0.29),
    Complex64::new(-1.37, -0.44),
    Complex64::new(0.93, 0.83),
    Complex64::new(2.57, 0.37),
    Complex64::new(-0.21, -0.71),
    Complex64::new(1.61, -0.57),
];

type C = Complex64;

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

fn s(p: &ModelParams, x: C) -> C {
    p.trig_s(x)
}

fn c(p: &ModelParams, x: C) -> C {
    p.trig_c(x)
}

fn nonzero(value: C, factor: impl FnOnce() -> String) -> Result<C> {
    if value.norm() < POLE_TOL || !value.is_finite() {
        return Err(Error::pole(factor(), value.norm()));
    }
    Ok(value)
}

/// `Delta(u) = c(u + L - K - 1/2) c(u + L + K + 1/2)`
pub fn delta_fn(p: &ModelParams, u: C) -> C {
    let (k, l) = (p.band_limit() as f64, p.time_limit() as f64);
    c(p, u + l - k - 0.5) * c(p, u + l + k + 0.5)
}

/// `f(u, v) = s(u+v-1) s(u-v-1) / (s(u+v) s(u-v))`
pub fn f_fn(p: &ModelParams, u: C, v: C) -> Result<C> {
    let d1 = nonzero(s(p, u + v), || format!("s(u+v) at u={u}, v={v}"))?;
    let d2 = nonzero(s(p, u - v), || format!("s(u-v) at u={u}, v={v}"))?;
    Ok(s(p, u + v - 1.0) * s(p, u - v - 1.0) / (d1 * d2))
}

/// `g(u, v, m) = s(1) s(2v-1) s(2m+v-u) / (s(2m) s(2u) s(u-v))`
pub fn g_fn(p: &ModelParams, u: C, v: C, m: i64) -> Result<C> {
    let m = m as f64;
    let d1 = nonzero(s(p, re(2.0 * m)), || format!("s(2m) at m={m}"))?;
    let d2 = nonzero(s(p, 2.0 * u), || format!("s(2u) at u={u}"))?;
    let d3 = nonzero(s(p, u - v), || format!("s(u-v) at u={u}, v={v}"))?;
    Ok(s(p, re(1.0)) * s(p, 2.0 * v - 1.0) * s(p, 2.0 * m + v - u) / (d1 * d2 * d3))
}

/// The Leonard pair and its (anti)commutator as dense matrices, from which
/// every `D(u, m)` and `B(u, m)` is a linear combination.
#[derive(Clone, Debug)]
pub struct DynamicalAlgebra {
    p: ModelParams,
    a: DMatrix<C>,
    a_star: DMatrix<C>,
    anti: DMatrix<C>,
    comm: DMatrix<C>,
}

impl DynamicalAlgebra {
    pub fn new(p: &ModelParams) -> Self {
        let (a, a_star) = leonard_pair(p);
        let a = a.to_dense().into_matrix();
        let a_star = a_star.to_dense().into_matrix();
        let anti = &a * &a_star + &a_star * &a;
        let comm = &a * &a_star - &a_star * &a;
        DynamicalAlgebra {
            p: *p,
            a,
            a_star,
            anti,
            comm,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.p
    }

    fn s(&self, x: C) -> C {
        s(&self.p, x)
    }

    fn c(&self, x: C) -> C {
        c(&self.p, x)
    }

    fn identity(&self) -> DMatrix<C> {
        DMatrix::identity(self.p.dim(), self.p.dim())
    }

    /// `D(u, m)`; needs `s(2u) != 0` and `s(2m) != 0`, so `m = 0` is rejected.
    pub fn d(&self, u: C, m: i64) -> Result<DMatrix<C>> {
        let mf = m as f64;
        let s2m = nonzero(self.s(re(2.0 * mf)), || format!("s(2m) in D at m={m}"))?;
        let s2u = nonzero(self.s(2.0 * u), || format!("s(2u) in D at u={u}"))?;
        let num = &self.a * self.c(re(2.0 * mf + 1.0)) - &self.a_star * self.c(2.0 * u - 2.0 * mf)
            - &self.anti / (4.0 * self.c(re(1.0)))
            + self.identity() * (2.0 * self.c(2.0 * u));
        Ok(num / (s2u * s2m))
    }

    /// `s(2m) B(u, m)`, which stays finite where `s(2m)` vanishes.
    pub fn b_numerator(&self, u: C, m: i64) -> DMatrix<C> {
        let (b0, b1) = self.b_split_numerator(m);
        b0 + b1 * self.c(2.0 * u)
    }

    /// `B(u, m)`; needs `s(2m) != 0`.
    pub fn b(&self, u: C, m: i64) -> Result<DMatrix<C>> {
        let s2m = nonzero(self.s(re(2.0 * m as f64)), || format!("s(2m) in B at m={m}"))?;
        Ok(self.b_numerator(u, m) / s2m)
    }

    /// `B(u, m) = B0(m) + c(2u) B1(m)`, both parts multiplied by `s(2m)`.
    fn b_split_numerator(&self, m: i64) -> (DMatrix<C>, DMatrix<C>) {
        let mf = m as f64;
        let b0 = &self.a * self.c(re(1.0)) + &self.comm * (self.s(re(2.0 * mf)) / (4.0 * self.s(re(1.0))))
            - &self.anti * (self.c(re(2.0 * mf)) / (4.0 * self.c(re(1.0))));
        let b1 = self.identity() * (2.0 * self.c(re(2.0 * mf))) - &self.a_star;
        (b0, b1)
    }

    /// `B(u, m) = B0(m) + c(2u) B1(m)`.
    pub fn b_split(&self, m: i64) -> Result<(DMatrix<C>, DMatrix<C>)> {
        let s2m = nonzero(self.s(re(2.0 * m as f64)), || format!("s(2m) in B at m={m}"))?;
        let (b0, b1) = self.b_split_numerator(m);
        Ok((b0 / s2m, b1 / s2m))
    }

    fn vacuum(&self) -> DVector<C> {
        let mut v = DVector::zeros(self.p.dim());
        v[0] = re(1.0);
        v
    }

    /// The factor used in Bethe states: `B(u, m)`, or `s(2m) B(u, m)` at the
    /// levels where `s(2m) = 0` and only the rescaled operator is finite.
    /// Rescaling a factor does not change the direction of the state.
    pub fn state_factor_split(&self, m: i64) -> (DMatrix<C>, DMatrix<C>) {
        let s2m = self.s(re(2.0 * m as f64));
        let (b0, b1) = self.b_split_numerator(m);
        if s2m.norm() < POLE_TOL {
            (b0, b1)
        } else {
            (b0 / s2m, b1 / s2m)
        }
    }

    /// The state factors at `roots` and `levels` applied to the vacuum.
    fn product_state(&self, roots: &[C], levels: &[i64]) -> DVector<C> {
        let mut v = self.vacuum();
        for (&x, &m) in roots.iter().zip(levels).rev() {
            let (b0, b1) = self.state_factor_split(m);
            v = (b0 + b1 * self.c(2.0 * x)) * v;
        }
        v
    }
}

/// `D(u, m)` as an operator on the parity sector.
pub fn dyn_d(p: &ModelParams, u: C, m: i64) -> Result<DenseOperator> {
    Ok(DenseOperator::from_matrix(DynamicalAlgebra::new(p).d(u, m)?, p.position_kind()))
}

/// `B(u, m)` as an operator on the parity sector.
pub fn dyn_b(p: &ModelParams, u: C, m: i64) -> Result<DenseOperator> {
    Ok(DenseOperator::from_matrix(DynamicalAlgebra::new(p).b(u, m)?, p.position_kind()))
}

/// Residuals of the exchange relations:
/// `B(u,m) B(v,m-1) = B(v,m) B(u,m-1)` and
/// `D(u,m) B(v,m) = f(u,v) B(v,m) D(u,m-1) + B(u,m) (g(u,v,m) D(v,m-1) + g(u,-v,m) D(-v,m-1))`.
pub fn check_dynamical_relations(p: &ModelParams, u: C, v: C, m: i64) -> Result<(f64, f64)> {
    let alg = DynamicalAlgebra::new(p);
    let r_bb = max_modulus(&(alg.b(u, m)? * alg.b(v, m - 1)? - alg.b(v, m)? * alg.b(u, m - 1)?));
    let lhs = alg.d(u, m)? * alg.b(v, m)?;
    let rhs = alg.b(v, m)? * alg.d(u, m - 1)? * f_fn(p, u, v)?
        + alg.b(u, m)?
            * (alg.d(v, m - 1)? * g_fn(p, u, v, m)? + alg.d(-v, m - 1)? * g_fn(p, u, -v, m)?);
    Ok((r_bb, max_modulus(&(lhs - rhs))))
}

/// Residuals of `T = 2c(2u) + Delta(u) D(u,L) + Delta(-u) D(-u,L)` and
/// `T = 2c(2u) + Delta(1-u) D(u,-L-1) + Delta(1+u) D(-u,-L-1)`.
pub fn check_t_decomposition(p: &ModelParams, u: C) -> Result<(f64, f64)> {
    let alg = DynamicalAlgebra::new(p);
    let t = heun_tb(p).to_dense().into_matrix();
    let l = p.time_limit() as i64;
    let base = alg.identity() * (2.0 * c(p, 2.0 * u));
    let first = &base + alg.d(u, l)? * delta_fn(p, u) + alg.d(-u, l)? * delta_fn(p, -u);
    let second = &base
        + alg.d(u, -l - 1)? * delta_fn(p, 1.0 - u)
        + alg.d(-u, -l - 1)? * delta_fn(p, 1.0 + u);
    Ok((max_modulus(&(&t - first)), max_modulus(&(&t - second))))
}

/// l2 residual of the action of `D(u, m)` on the vacuum:
/// `D|0,+> = -2|0,+> - B|0,+>/s(2u)` or
/// `D|1,-> = 2 s(2-2u)/s(2u) |1,-> - s(m-1)/(s(m+1) s(2u)) B|1,->`.
pub fn check_vacuum_action(p: &ModelParams, u: C, m: i64) -> Result<f64> {
    let alg = DynamicalAlgebra::new(p);
    let vac = alg.vacuum();
    let lhs = alg.d(u, m)? * &vac;
    let s2u = nonzero(s(p, 2.0 * u), || format!("s(2u) at u={u}"))?;
    let b_vac = alg.b(u, m)? * &vac;
    let rhs = match p.parity() {
        Parity::Plus => &vac * re(-2.0) - b_vac / s2u,
        Parity::Minus => {
            let mf = m as f64;
            let den = nonzero(s(p, re(mf + 1.0)), || format!("s(m+1) at m={m}"))?;
            let coef = s(p, re(mf - 1.0)) / (den * s2u);
            &vac * (2.0 * s(p, 2.0 - 2.0 * u) / s2u) - b_vac * coef
        }
    };
    Ok((lhs - rhs).norm())
}

/// Residual of the off-shell action of `D(u, L)` on a first-ansatz state
/// `V(x)`: the diagonal term in `V(x)` plus, for every root and both signs, a
/// term in the state with that root replaced by `u`. Holds for arbitrary
/// roots, not only solutions. The residual is relative to the norm of the
/// left side, since the state's entries grow quickly with the root count.
pub fn check_off_shell_action(p: &ModelParams, roots: &[C], u: C) -> Result<f64> {
    let variant = AnsatzVariant::MinusFirst;
    variant.check_admissible(p)?;
    variant.check_count(p, roots)?;
    let alg = DynamicalAlgebra::new(p);
    let l = p.time_limit() as i64;
    let levels = variant.levels(p);
    let state = alg.product_state(roots, &levels);
    let lhs = alg.d(u, l)? * &state;

    let s2u = nonzero(s(p, 2.0 * u), || format!("s(2u) at u={u}"))?;
    let mut diag = 2.0 * s(p, 2.0 - 2.0 * u) / s2u;
    for &x in roots {
        diag *= f_fn(p, u, x)?;
    }
    let mut rhs = &state * diag;
    for j in 0..roots.len() {
        let mut replaced = roots.to_vec();
        replaced[j] = u;
        let swapped = alg.product_state(&replaced, &levels);
        for eps in [1.0, -1.0] {
            let xj = roots[j] * eps;
            let s2x = nonzero(s(p, 2.0 * xj), || format!("s(2x) at x={xj}"))?;
            let mut coef = 2.0 * s(p, 2.0 - 2.0 * xj) / s2x * g_fn(p, u, xj, l)?;
            for (i, &xi) in roots.iter().enumerate() {
                if i != j {
                    coef *= f_fn(p, xj, xi)?;
                }
            }
            rhs += &swapped * coef;
        }
    }
    let scale = lhs.norm().max(f64::MIN_POSITIVE);
    Ok((lhs - rhs).norm() / scale)
}

/// Residual of the length-`L` reduction of the second antisymmetric ansatz:
/// `W({y_1..y_L})` (last factor at level `-2L`) against
/// `2 s(2L-1) s(2L+1)/s(4L) sum_j s(2y_j(L+1))/s(2y_j) prod_{i!=j} 1/(4 s(y_i+y_j) s(y_i-y_j)) W(y without y_j)`.
///
/// Both sides are multiplied by `s(4L)`, which keeps the check meaningful
/// where `s(4L) = 0`. The result is relative to the norm of the left side.
/// With `u_slot_last = false` the first root is moved to the `-2L` slot.
pub fn check_reduction_formula(p: &ModelParams, ys: &[C], u_slot_last: bool) -> Result<f64> {
    if p.parity() != Parity::Minus {
        return Err(Error::Inadmissible("reduction formula lives in the antisymmetric sector".into()));
    }
    let l = p.time_limit();
    if ys.len() != l {
        return Err(Error::RootCount {
            expected: l,
            got: ys.len(),
        });
    }
    if l == 0 || l >= p.n() {
        return Err(Error::Inadmissible(format!("reduction formula needs 1 <= L <= n-1, got L={l}")));
    }
    let mut y = ys.to_vec();
    if !u_slot_last {
        y.rotate_left(1);
    }
    let alg = DynamicalAlgebra::new(p);
    let li = l as i64;
    let levels: Vec<i64> = (0..li - 1).map(|i| -li - 1 - i).collect();

    // s(4L) B(y_L, -2L) = -(s(-4L) B(y_L, -2L))
    let mut lhs = alg.b_numerator(y[l - 1], -2 * li) * alg.vacuum() * re(-1.0);
    for (&x, &m) in y[..l - 1].iter().zip(&levels).rev() {
        lhs = alg.b(x, m)? * lhs;
    }

    let lf = l as f64;
    let mut rhs = DVector::<C>::zeros(p.dim());
    for j in 0..l {
        let s2y = nonzero(s(p, 2.0 * y[j]), || format!("s(2y) at y={}", y[j]))?;
        let mut coef = s(p, 2.0 * y[j] * (lf + 1.0)) / s2y;
        for i in 0..l {
            if i != j {
                let plus = nonzero(s(p, y[i] + y[j]), || format!("s(y{i}+y{j})"))?;
                let minus = nonzero(s(p, y[i] - y[j]), || format!("s(y{i}-y{j})"))?;
                coef /= 4.0 * plus * minus;
            }
        }
        let rest: Vec<C> = y.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &v)| v).collect();
        rhs += alg.product_state(&rest, &levels) * coef;
    }
    rhs *= 2.0 * s(p, re(2.0 * lf - 1.0)) * s(p, re(2.0 * lf + 1.0));
    let scale = lhs.norm().max(f64::MIN_POSITIVE);
    Ok((lhs - rhs).norm() / scale)
}

/// The three Bethe ansaetze.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnsatzVariant {
    /// `V(x) = B(x_1, L) B(x_2, L-1) ... B(x_{L-1}, 2) |1,->`, with `L - 1` roots.
    MinusFirst,
    /// `W(y) = B(y_1, -L-1) ... B(y_{L-1}, -2L+1) |1,->`, with `L - 1` roots.
    MinusSecond,
    /// `W(z) = B(z_0, -L-1) ... B(z_{L-1}, -2L) |0,+>`, with `L` roots.
    Plus,
}

impl AnsatzVariant {
    pub const ALL: [AnsatzVariant; 3] = [
        AnsatzVariant::MinusFirst,
        AnsatzVariant::MinusSecond,
        AnsatzVariant::Plus,
    ];

    pub fn parity(self) -> Parity {
        match self {
            AnsatzVariant::Plus => Parity::Plus,
            _ => Parity::Minus,
        }
    }

    pub fn root_count(self, p: &ModelParams) -> usize {
        let l = p.time_limit();
        match self {
            AnsatzVariant::Plus => l,
            _ => l.saturating_sub(1),
        }
    }

    /// The `m` argument of each `B` factor, leftmost first.
    pub fn levels(self, p: &ModelParams) -> Vec<i64> {
        let l = p.time_limit() as i64;
        match self {
            AnsatzVariant::MinusFirst => (2..=l).rev().collect(),
            AnsatzVariant::MinusSecond => (0..l - 1).map(|i| -l - 1 - i).collect(),
            AnsatzVariant::Plus => (0..l).map(|i| -l - 1 - i).collect(),
        }
    }

    /// The `m` at which `T` is decomposed into `D` operators.
    pub fn decomposition_level(self, p: &ModelParams) -> i64 {
        let l = p.time_limit() as i64;
        match self {
            AnsatzVariant::MinusFirst => l,
            _ => -l - 1,
        }
    }

    /// Checks parity and the range of `L`: `1 <= L <= n-1` for the
    /// antisymmetric ansaetze, `L <= n-1` and `c(2L+1) != 0` for `Plus`.
    /// (At `L = n` the symmetric window splits and has no cyclic vector.)
    pub fn check_admissible(self, p: &ModelParams) -> Result<()> {
        if p.parity() != self.parity() {
            return Err(Error::Inadmissible(format!("{self} needs parity {}", self.parity())));
        }
        let l = p.time_limit();
        if l >= p.n() || (self.parity() == Parity::Minus && l == 0) {
            let low = if self.parity() == Parity::Minus { 1 } else { 0 };
            return Err(Error::Inadmissible(format!("{self} needs {low} <= L <= n-1, got L={l}")));
        }
        if self == AnsatzVariant::Plus && c(p, re(2.0 * l as f64 + 1.0)).norm() < POLE_TOL {
            return Err(Error::Inadmissible("c(2L+1) vanishes".into()));
        }
        Ok(())
    }

    fn check_count(self, p: &ModelParams, roots: &[C]) -> Result<()> {
        let expected = self.root_count(p);
        if roots.len() != expected {
            return Err(Error::RootCount {
                expected,
                got: roots.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for AnsatzVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnsatzVariant::MinusFirst => "minus-first",
            AnsatzVariant::MinusSecond => "minus-second",
            AnsatzVariant::Plus => "plus",
        })
    }
}

impl FromStr for AnsatzVariant {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text.to_ascii_lowercase().as_str() {
            "minus-first" | "minusfirst" | "first" => Ok(AnsatzVariant::MinusFirst),
            "minus-second" | "minussecond" | "second" => Ok(AnsatzVariant::MinusSecond),
            "plus" => Ok(AnsatzVariant::Plus),
            other => Err(Error::InvalidParams(format!("unknown ansatz {other:?}"))),
        }
    }
}

/// The Bethe state of `variant` at `roots`.
pub fn bethe_state(p: &ModelParams, variant: AnsatzVariant, roots: &[C]) -> Result<SignalVector> {
    variant.check_admissible(p)?;
    variant.check_count(p, roots)?;
    let alg = DynamicalAlgebra::new(p);
    Ok(SignalVector::new(alg.product_state(roots, &variant.levels(p)), p.position_kind()))
}

fn check_root_poles(p: &ModelParams, roots: &[C]) -> Result<()> {
    for (j, &x) in roots.iter().enumerate() {
        nonzero(s(p, 2.0 * x), || format!("s(2x_{j}) at x={x}"))?;
        for (i, &y) in roots.iter().enumerate().take(j) {
            nonzero(s(p, x - y), || format!("s(x_{j}-x_{i})"))?;
            nonzero(s(p, x + y), || format!("s(x_{j}+x_{i})"))?;
        }
    }
    Ok(())
}

/// Bethe equations in cleared-denominator form; `scale` multiplies the
/// inhomogeneous term (1 for the actual equations).
fn cleared_residuals(p: &ModelParams, variant: AnsatzVariant, roots: &[C], scale: f64) -> Vec<C> {
    let lf = p.time_limit() as f64;
    let sp = |x: C| s(p, x);
    (0..roots.len())
        .map(|j| {
            let x = roots[j];
            let mut pm = re(1.0);
            let mut pp = re(1.0);
            for (i, &y) in roots.iter().enumerate() {
                if i != j {
                    pm *= sp(x - y - 1.0) * sp(x + y - 1.0);
                    pp *= sp(x - y + 1.0) * sp(x + y + 1.0);
                }
            }
            let (a, b, inh) = match variant {
                AnsatzVariant::MinusFirst => {
                    return delta_fn(p, x) * sp(2.0 - 2.0 * x) * sp(1.0 - 2.0 * x) * pm
                        - delta_fn(p, -x) * sp(2.0 + 2.0 * x) * sp(1.0 + 2.0 * x) * pp;
                }
                AnsatzVariant::MinusSecond => (
                    delta_fn(p, 1.0 - x) * sp(2.0 - 2.0 * x) * sp(1.0 - 2.0 * x),
                    delta_fn(p, 1.0 + x) * sp(2.0 + 2.0 * x) * sp(1.0 + 2.0 * x),
                    sp(re(2.0 * lf + 1.0)).powi(2) * sp(2.0 * x * (lf + 1.0)) * sp(2.0 * x - 1.0),
                ),
                AnsatzVariant::Plus => (
                    delta_fn(p, 1.0 - x) * sp(2.0 * x - 1.0),
                    delta_fn(p, 1.0 + x) * sp(2.0 * x + 1.0),
                    sp(re(4.0 * lf + 2.0)) * sp(re(2.0 * lf + 1.0)) * c(p, 2.0 * x * (lf + 1.0))
                        * sp(2.0 * x - 1.0)
                        / c(p, re(2.0 * lf + 1.0)),
                ),
            };
            let q: C = roots
                .iter()
                .map(|&y| 4.0 * sp(y - x + 1.0) * sp(y + x - 1.0))
                .product();
            a * pm * q - b * pp * q + inh * pm * scale
        })
        .collect()
}

/// `LHS - RHS` of every Bethe equation of `variant`, with all displayed
/// denominators cleared.
pub fn bethe_residuals(p: &ModelParams, variant: AnsatzVariant, roots: &[C]) -> Result<Vec<C>> {
    variant.check_admissible(p)?;
    variant.check_count(p, roots)?;
    check_root_poles(p, roots)?;
    Ok(cleared_residuals(p, variant, roots, 1.0))
}

/// The eigenvalue formula `t(u)` of `variant` at `roots`.
pub fn bethe_eigenvalue(p: &ModelParams, variant: AnsatzVariant, roots: &[C], u: C) -> Result<C> {
    variant.check_admissible(p)?;
    variant.check_count(p, roots)?;
    let lf = p.time_limit() as f64;
    let s2u = nonzero(s(p, 2.0 * u), || format!("s(2u) at u={u}"))?;
    let mut fu = re(1.0);
    let mut fmu = re(1.0);
    let mut inv = re(1.0);
    for &x in roots {
        fu *= f_fn(p, u, x)?;
        fmu *= f_fn(p, -u, x)?;
        let den = nonzero(4.0 * s(p, x + u) * s(p, x - u), || format!("s(x+u) s(x-u) at x={x}"))?;
        inv /= den;
    }
    let base = 2.0 * c(p, 2.0 * u);
    Ok(match variant {
        AnsatzVariant::MinusFirst => {
            base + 2.0 * delta_fn(p, u) * s(p, 2.0 - 2.0 * u) / s2u * fu
                - 2.0 * delta_fn(p, -u) * s(p, 2.0 + 2.0 * u) / s2u * fmu
        }
        AnsatzVariant::MinusSecond => {
            base + 2.0 * delta_fn(p, 1.0 - u) * s(p, 2.0 - 2.0 * u) / s2u * fu
                - 2.0 * delta_fn(p, 1.0 + u) * s(p, 2.0 + 2.0 * u) / s2u * fmu
                - 2.0 * s(p, re(2.0 * lf + 1.0)).powi(2) * s(p, 2.0 * u * (lf + 1.0)) / s2u * inv
        }
        AnsatzVariant::Plus => {
            let c2l1 = nonzero(c(p, re(2.0 * lf + 1.0)), || "c(2L+1)".into())?;
            base - 2.0 * delta_fn(p, 1.0 - u) * fu - 2.0 * delta_fn(p, 1.0 + u) * fmu
                - 2.0 * s(p, re(4.0 * lf + 2.0)) * s(p, re(2.0 * lf + 1.0)) * c(p, 2.0 * u * (lf + 1.0))
                    / c2l1
                    * inv
        }
    })
}

/// `t(u)` at the first [`U_SAMPLE_COUNT`] sample points that avoid the poles
/// of `roots`.
pub fn eigenvalue_samples(p: &ModelParams, variant: AnsatzVariant, roots: &[C]) -> Result<Vec<C>> {
    let mut out = Vec::with_capacity(U_SAMPLE_COUNT);
    let mut last_err = None;
    for &u in &U_SAMPLES {
        match bethe_eigenvalue(p, variant, roots, u) {
            Ok(t) if t.is_finite() => out.push(t),
            Ok(_) => {}
            Err(e @ Error::Pole { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
        if out.len() == U_SAMPLE_COUNT {
            return Ok(out);
        }
    }
    Err(last_err.unwrap_or_else(|| Error::pole("t(u) at every sample point", 0.0)))
}

/// Reduces a root modulo `2n` into `Re in [0, n]` using `x -> -x`
/// (both leave every equation and `c(2x)` unchanged), taking `Im >= 0` on
/// the two boundary lines.
pub fn canonical_root(p: &ModelParams, x: C) -> C {
    let period = 2.0 * p.n() as f64;
    let half = p.n() as f64;
    let mut r = x.re.rem_euclid(period);
    if r > half {
        r -= period;
    }
    let mut z = C::new(r, x.im);
    if z.re < 0.0 {
        z = -z;
    }
    let on_edge = z.re.abs() < 1e-9 || (z.re - half).abs() < 1e-9;
    if on_edge && z.im < 0.0 {
        z = C::new(z.re, -z.im);
        if (z.re - half).abs() < 1e-9 {
            z.re = half;
        }
    }
    // adding zero turns -0.0 into 0.0
    C::new(z.re + 0.0, z.im + 0.0)
}

/// Canonical form of a root set: every root canonicalized, then sorted by
/// `(Re, Im)`.
pub fn canonicalize(p: &ModelParams, roots: &[C]) -> Vec<C> {
    let mut out: Vec<C> = roots.iter().map(|&x| canonical_root(p, x)).collect();
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    out
}

/// Where an accepted root set came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum RootSource {
    /// Seeded by expanding the Bethe state in elementary symmetric functions
    /// of `c(2x_i)` and matching it to the target eigenvector.
    Linearized,
    /// Seeded randomly; `start` is the index of the Newton start.
    MultiStart { start: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetheRootSet {
    pub variant: AnsatzVariant,
    /// Canonical roots in grid units.
    pub roots: Vec<C>,
    /// Largest modulus of the cleared Bethe residuals.
    pub residual: f64,
    /// `t(u)` at the first sample point.
    pub eigenvalue: C,
    /// Largest `|t(u_i) - t(u_0)|` over the sample points.
    pub u_spread: f64,
    /// Index into the ascending top-block spectrum of the matched eigenvalue.
    pub level: usize,
    pub spectral_value: f64,
    pub source: RootSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_starts: usize,
    pub newton_max_iter: usize,
    pub residual_tol: f64,
    pub match_tol: f64,
    pub rng_seed: u64,
    pub homotopy_steps: usize,
    /// Try the linearized seed for every eigenvalue before random starts.
    pub linearized_seeds: bool,
}

impl SolverConfig {
    /// Defaults for a model whose sector has dimension `dim`.
    pub fn for_params(p: &ModelParams) -> Self {
        SolverConfig {
            max_starts: 64 * p.dim(),
            ..SolverConfig::default()
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_starts: 64,
            newton_max_iter: 200,
            residual_tol: 1e-9,
            match_tol: 1e-6,
            rng_seed: 0,
            homotopy_steps: 8,
            linearized_seeds: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub variant: AnsatzVariant,
    /// Ascending eigenvalues of `T` on the time window.
    pub spectrum: Vec<f64>,
    /// Accepted root sets, ordered by `level`.
    pub sets: Vec<BetheRootSet>,
    /// Spectrum indices with no accepted root set.
    pub missing: Vec<usize>,
    pub starts_used: usize,
}

impl SolveReport {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }
}

fn max_norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Damped Newton with a central-difference Jacobian. Returns the final point
/// and its residual, or `None` if the start is outside the finite domain.
/// Stops early on a singular Jacobian or a step that does not reduce the
/// residual.
fn newton<F>(residual: F, mut x: Vec<C>, max_iter: usize, tol: f64) -> Option<(Vec<C>, f64)>
where
    F: Fn(&[C]) -> Vec<C>,
{
    let dim = x.len();
    let finite = |v: &[C]| v.iter().all(|z| z.is_finite());
    let mut fx = residual(&x);
    if !finite(&fx) {
        return None;
    }
    let mut norm = max_norm(&fx);
    for _ in 0..max_iter {
        if norm < tol * 1e-3 {
            break;
        }
        let mut jac = DMatrix::<C>::zeros(dim, dim);
        for a in 0..dim {
            let h = 1e-6 * (1.0 + x[a].norm());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[a] += h;
            xm[a] -= h;
            let (fp, fm) = (residual(&xp), residual(&xm));
            for b in 0..dim {
                jac[(b, a)] = (fp[b] - fm[b]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_iterator(dim, fx.iter().map(|z| -z));
        let Some(step) = jac.lu().solve(&rhs).filter(|d| d.iter().all(|z| z.is_finite())) else {
            break;
        };
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-4 {
            let trial: Vec<C> = x.iter().zip(step.iter()).map(|(a, d)| a + d * lambda).collect();
            let ft = residual(&trial);
            if finite(&ft) && max_norm(&ft) < norm {
                x = trial;
                fx = ft;
                norm = max_norm(&fx);
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        let step_len = step.norm() * lambda;
        let scale = 1.0 + x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !improved || step_len < 1e-15 * scale {
            break;
        }
    }
    if norm.is_finite() {
        Some((x, norm))
    } else {
        None
    }
}

/// Real roots-of-polynomial helper: roots of `z^r + a_1 z^{r-1} + ... + a_r`
/// from the companion matrix, polished by a few Newton steps.
fn monic_roots(tail: &[f64]) -> Vec<C> {
    let r = tail.len();
    if r == 0 {
        return Vec::new();
    }
    let mut comp = DMatrix::<f64>::zeros(r, r);
    for (k, &a) in tail.iter().enumerate() {
        comp[(0, k)] = -a;
    }
    for i in 1..r {
        comp[(i, i - 1)] = 1.0;
    }
    let eval = |z: C| -> (C, C) {
        let mut v = re(1.0);
        let mut dv = re(0.0);
        for &a in tail {
            dv = dv * z + v;
            v = v * z + a;
        }
        (v, dv)
    };
    comp.complex_eigenvalues()
        .iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..4 {
                let (v, dv) = eval(z);
                if dv.norm() == 0.0 {
                    break;
                }
                let next = z - v / dv;
                if !next.is_finite() {
                    break;
                }
                z = next;
            }
            z
        })
        .collect()
}

/// Seeds a root set for eigenvector `target` (top-block coordinates).
///
/// `B(x, m) = B0(m) + c(2x) B1(m)` and the factors commute in the sense of
/// the exchange relation, so the Bethe state is `sum_k e_k(w) U_k` with `e_k`
/// the elementary symmetric functions of `w_i = c(2 x_i)` and `U_k` the
/// product with `B1` in the first `k` slots. Requiring the state to be
/// proportional to `target` is a square linear system in `(e_1..e_r, lambda)`.
fn linearized_seed(p: &ModelParams, variant: AnsatzVariant, target: &DVector<f64>) -> Option<Vec<C>> {
    let alg = DynamicalAlgebra::new(p);
    let levels = variant.levels(p);
    let r = levels.len();
    let size = r + 1;
    let splits: Vec<(DMatrix<C>, DMatrix<C>)> = levels.iter().map(|&m| alg.state_factor_split(m)).collect();
    let columns: Vec<DVector<f64>> = (0..=r)
        .map(|k| {
            let mut v = alg.vacuum();
            for (slot, (b0, b1)) in splits.iter().enumerate().rev() {
                v = if slot < k { b1 * v } else { b0 * v };
            }
            DVector::from_iterator(size, v.iter().take(size).map(|z| z.re))
        })
        .collect();
    let mut m = DMatrix::<f64>::zeros(size, size);
    for (k, col) in columns.iter().enumerate().skip(1).take(r) {
        m.set_column(k - 1, col);
    }
    m.set_column(r, &(-target));
    let e = m.full_piv_lu().solve(&(-&columns[0]))?;
    if !e.iter().all(|x| x.is_finite()) {
        return None;
    }
    // prod (z - w_i) = z^r - e_1 z^{r-1} + e_2 z^{r-2} - ...
    let tail: Vec<f64> = (0..r).map(|k| if k % 2 == 0 { -e[k] } else { e[k] }).collect();
    let n = p.n() as f64;
    Some(
        monic_roots(&tail)
            .into_iter()
            .map(|w| w.acos() * (n / std::f64::consts::PI))
            .collect(),
    )
}

/// Shared state for turning candidate roots into accepted sets.
struct Acceptor<'a> {
    p: &'a ModelParams,
    variant: AnsatzVariant,
    config: &'a SolverConfig,
    spectrum: &'a [f64],
}

impl Acceptor<'_> {
    fn excluded(&self, roots: &[C]) -> bool {
        let n = self.p.n() as f64;
        let near_lattice = |z: C, period: f64| {
            let r = z.re.rem_euclid(period);
            r.min(period - r).hypot(z.im) < EXCLUSION_TOL
        };
        for (j, &x) in roots.iter().enumerate() {
            if near_lattice(x, n) {
                return true;
            }
            for &y in &roots[..j] {
                if near_lattice(x - y, 2.0 * n) || near_lattice(x + y, 2.0 * n) {
                    return true;
                }
            }
        }
        false
    }

    /// Polishes `roots` on the full equations and validates them. Returns the
    /// candidate set with its best spectral match among `open` levels.
    fn accept(&self, roots: Vec<C>, open: &[bool], source: RootSource) -> Option<BetheRootSet> {
        let (p, variant) = (self.p, self.variant);
        let roots = if roots.is_empty() {
            roots
        } else {
            let (x, _) = newton(
                |x| cleared_residuals(p, variant, x, 1.0),
                roots,
                self.config.newton_max_iter,
                self.config.residual_tol,
            )?;
            x
        };
        let roots = canonicalize(p, &roots);
        if self.excluded(&roots) {
            return None;
        }
        let residual = max_norm(&bethe_residuals(p, variant, &roots).ok()?);
        // written so that a NaN residual is rejected too
        if residual.is_nan() || residual >= self.config.residual_tol {
            return None;
        }
        let samples = eigenvalue_samples(p, variant, &roots).ok()?;
        let t0 = samples[0];
        let u_spread = samples.iter().map(|t| (t - t0).norm()).fold(0.0, f64::max);
        if u_spread.is_nan() || u_spread >= U_SPREAD_TOL || t0.im.abs() >= U_SPREAD_TOL {
            return None;
        }
        let (level, gap) = self
            .spectrum
            .iter()
            .enumerate()
            .filter(|&(i, _)| open[i])
            .map(|(i, &t)| (i, (t - t0.re).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        if gap >= self.config.match_tol {
            return None;
        }
        Some(BetheRootSet {
            variant,
            roots,
            residual,
            eigenvalue: t0,
            u_spread,
            level,
            spectral_value: self.spectrum[level],
            source,
        })
    }
}

/// One random Newton start: a seed from one of four families (real segment,
/// complex box, and the two lines `Re = 0`, `Re = n` on which large roots
/// accumulate), refined by Newton. For the ansaetze with an inhomogeneous
/// term a start that fails is retried along a homotopy that switches that
/// term on in `homotopy_steps` stages. Half of the starts also pin its first root to
/// one of the points `1/2`, `n - 1/2`, where the cleared equations are
/// degenerate and Newton converges too slowly to find them unaided.
fn random_start(p: &ModelParams, variant: AnsatzVariant, config: &SolverConfig, start: usize) -> Option<Vec<C>> {
    let r = variant.root_count(p);
    let n = p.n() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed ^ (start as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let family = start % 4;
    let pinned = match (start / 4) % 4 {
        1 => Some(re(0.5)),
        2 => Some(re(n - 0.5)),
        _ => None,
    };
    let seed: Vec<C> = (0..r)
        .map(|_| {
            let jitter = C::new(rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05));
            let z = match family {
                0 => C::new(rng.random_range(0.05..n - 0.05), rng.random_range(-0.3..0.3)),
                1 => C::new(rng.random_range(0.05..n - 0.05), rng.random_range(-1.0..1.0)),
                2 => C::new(0.0, rng.random_range(0.05..2.0 * n)),
                _ => C::new(n, rng.random_range(0.05..2.0 * n)),
            };
            z + jitter
        })
        .enumerate()
        .map(|(i, z)| if i == 0 { pinned.unwrap_or(z) } else { z })
        .collect();
    let tol = config.residual_tol;
    let direct = newton(|v| cleared_residuals(p, variant, v, 1.0), seed.clone(), config.newton_max_iter, tol)?;
    if variant == AnsatzVariant::MinusFirst || direct.1 < tol {
        return Some(direct.0);
    }
    let steps = config.homotopy_steps.max(1);
    let mut x = seed;
    for k in 0..=steps {
        let scale = k as f64 / steps as f64;
        let (next, _) = newton(
            |v| cleared_residuals(p, variant, v, scale),
            x,
            config.newton_max_iter / 4 + 1,
            tol,
        )?;
        x = next;
    }
    Some(x)
}

/// Solves the Bethe equations of `variant` for every eigenvalue of `T` on
/// the time window.
///
/// Each eigenvalue first gets a linearized seed (see [`RootSource`]); any
/// still unmatched are then attacked with up to `max_starts` random Newton
/// starts run in parallel and merged in start order, so results depend only
/// on the seed. Every accepted set has residual below `residual_tol`,
/// `u`-spread below 1e-8 and matches a distinct eigenvalue within
/// `match_tol`. Unmatched eigenvalues are listed in `missing`.
pub fn solve_bethe(p: &ModelParams, variant: AnsatzVariant, config: &SolverConfig) -> Result<SolveReport> {
    variant.check_admissible(p)?;
    let block = heun_tb(p).leading_block(p.time_rank());
    let eig = eig_sym_tridiag(&block)?;
    let spectrum = eig.values();
    let acceptor = Acceptor {
        p,
        variant,
        config,
        spectrum: &spectrum,
    };
    let mut open = vec![true; spectrum.len()];
    let mut sets: Vec<BetheRootSet> = Vec::new();
    let mut record = |set: BetheRootSet, open: &mut Vec<bool>| {
        open[set.level] = false;
        sets.push(set);
    };

    if config.linearized_seeds || variant.root_count(p) == 0 {
        for (l, pair) in eig.pairs.iter().enumerate() {
            if !open[l] {
                continue;
            }
            let target = pair.vector.coeffs.map(|z| z.re);
            if let Some(seed) = linearized_seed(p, variant, &target) {
                if let Some(set) = acceptor.accept(seed, &open, RootSource::Linearized) {
                    record(set, &mut open);
                }
            }
        }
    }

    let chunk = rayon::current_num_threads().max(1) * 4;
    let mut starts_used = 0;
    while open.iter().any(|&o| o) && starts_used < config.max_starts && variant.root_count(p) > 0 {
        let range = starts_used..(starts_used + chunk).min(config.max_starts);
        starts_used = range.end;
        let snapshot = open.clone();
        let found: Vec<Option<BetheRootSet>> = range
            .into_par_iter()
            .map(|start| {
                let seed = random_start(p, variant, config, start)?;
                acceptor.accept(seed, &snapshot, RootSource::MultiStart { start })
            })
            .collect();
        for set in found.into_iter().flatten() {
            if open[set.level] {
                record(set, &mut open);
            }
        }
    }

    sets.sort_by_key(|s| s.level);
    let missing: Vec<usize> = open.iter().enumerate().filter(|&(_, &o)| o).map(|(i, _)| i).collect();
    if !missing.is_empty() {
        log::warn!("{variant} at {p:?}: no root set for spectrum indices {missing:?}");
    }
    Ok(SolveReport {
        variant,
        spectrum,
        sets,
        missing,
        starts_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::projector_time;

    fn mp(n: usize, k: usize, l: usize, parity: Parity) -> ModelParams {
        ModelParams::new(n, k, l, parity).unwrap()
    }

    fn cx(a: f64, b: f64) -> C {
        C::new(a, b)
    }

    #[test]
    fn delta_zeros_and_value() {
        let p = mp(8, 3, 2, Parity::Minus);
        let (n, k, l) = (8.0, 3.0, 2.0);
        assert!(delta_fn(&p, re(n - l + k + 0.5)).norm() < 1e-15);
        assert!(delta_fn(&p, re(n - l - k - 0.5)).norm() < 1e-15);
        let direct = (std::f64::consts::PI * (l - k - 0.5) / 16.0).cos()
            * (std::f64::consts::PI * (l + k + 0.5) / 16.0).cos();
        assert!((delta_fn(&p, re(0.0)).re - direct).abs() < 1e-15);
    }

    #[test]
    fn f_and_g() {
        let p = mp(6, 2, 3, Parity::Minus);
        for u in [cx(0.3, 0.1), cx(1.7, -0.4), cx(-2.2, 0.9)] {
            assert!(f_fn(&p, u, u - 1.0).unwrap().norm() < 1e-15);
            assert!(matches!(f_fn(&p, u, u), Err(Error::Pole { .. })));
        }
        let (u, v, m) = (cx(0.3, 0.1), re(1.2), 4);
        // second evaluation straight from sin with explicit grid scaling
        let sn = |x: C| (x * (std::f64::consts::PI / 12.0)).sin();
        let other = sn(re(1.0)) * sn(2.0 * v - 1.0) * sn(2.0 * 4.0 + v - u) / (sn(re(8.0)) * sn(2.0 * u) * sn(u - v));
        assert!((g_fn(&p, u, v, m).unwrap() - other).norm() < 1e-14);
    }

    #[test]
    fn b_is_tridiagonal_and_decouples() {
        for parity in [Parity::Minus, Parity::Plus] {
            let p = mp(8, 3, 4, parity);
            let b = dyn_b(&p, cx(0.7, 0.3), -5).unwrap();
            for i in 0..p.dim() {
                for j in 0..p.dim() {
                    if i.abs_diff(j) > 1 {
                        assert!(b.matrix()[(i, j)].norm() < 1e-13);
                    }
                }
            }
        }
        let p = mp(8, 3, 4, Parity::Minus);
        let b = dyn_b(&p, cx(0.37, -1.1), -5).unwrap();
        // <L+1,-| B(x, -L-1) |L,-> with labels stored one below
        assert!(b.matrix()[(4, 3)].norm() < 1e-13);
        assert!(matches!(dyn_d(&p, cx(0.3, 0.0), 0), Err(Error::Pole { .. })));
    }

    #[test]
    fn exchange_relations() {
        let p = mp(6, 2, 3, Parity::Minus);
        let (bb, db) = check_dynamical_relations(&p, re(0.37), re(1.21), 3).unwrap();
        assert!(bb < 1e-10 && db < 1e-10);
        let (bb2, _) = check_dynamical_relations(&p, re(1.21), re(0.37), 3).unwrap();
        assert!((bb - bb2).abs() < 1e-12);
        let p = mp(6, 2, 3, Parity::Plus);
        let (bb, db) = check_dynamical_relations(&p, cx(0.2, 0.3), cx(0.9, -0.1), -4).unwrap();
        assert!(bb < 1e-9 && db < 1e-9);
    }

    #[test]
    fn t_decomposition() {
        let p = mp(8, 3, 4, Parity::Minus);
        let (r1, r2) = check_t_decomposition(&p, re(0.618)).unwrap();
        assert!(r1 < 1e-10 && r2 < 1e-10);
        assert!(matches!(check_t_decomposition(&p, re(0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn vacuum_actions() {
        assert!(check_vacuum_action(&mp(6, 2, 3, Parity::Minus), re(0.41), 1).unwrap() < 1e-11);
        assert!(check_vacuum_action(&mp(6, 2, 3, Parity::Plus), re(0.41), 3).unwrap() < 1e-11);
        assert!(check_vacuum_action(&mp(6, 2, 3, Parity::Minus), re(0.41), -5).unwrap() < 1e-11);
    }

    #[test]
    fn states() {
        let p = mp(8, 3, 4, Parity::Minus);
        let roots = [cx(0.7, 0.2), cx(2.3, -0.5), cx(3.1, 0.9)];
        let v = bethe_state(&p, AnsatzVariant::MinusFirst, &roots).unwrap();
        let proj = projector_time(&p).matrix() * &v.coeffs;
        assert!((proj - &v.coeffs).norm() < 1e-11);
        let swapped = [roots[1], roots[0], roots[2]];
        let w = bethe_state(&p, AnsatzVariant::MinusFirst, &swapped).unwrap();
        assert!((&w.coeffs - &v.coeffs).norm() < 1e-10 * v.norm());

        let p1 = mp(8, 3, 1, Parity::Minus);
        let e = bethe_state(&p1, AnsatzVariant::MinusFirst, &[]).unwrap();
        assert_eq!(e, SignalVector::unit(p1.dim(), 0, p1.position_kind()));
        assert!(matches!(
            bethe_state(&p, AnsatzVariant::MinusFirst, &roots[..2]),
            Err(Error::RootCount { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn single_level_eigenvalue() {
        let p = mp(6, 2, 1, Parity::Minus);
        assert!(bethe_residuals(&p, AnsatzVariant::MinusFirst, &[]).unwrap().is_empty());
        let expected = -2.0 * p.cr(5.0) * p.cr(2.0);
        for u in U_SAMPLES {
            let t = bethe_eigenvalue(&p, AnsatzVariant::MinusFirst, &[], u).unwrap();
            assert!((t - re(expected)).norm() < 1e-12);
        }
    }

    #[test]
    fn off_shell_action() {
        let p = mp(8, 3, 4, Parity::Minus);
        let r = check_off_shell_action(&p, &[cx(0.7, 0.2), cx(2.3, -0.5), cx(3.1, 0.9)], cx(0.3, 0.2)).unwrap();
        assert!(r < 1e-9);
    }

    #[test]
    fn reduction() {
        let p = mp(8, 1, 3, Parity::Minus);
        let ys = [cx(1.1, 0.3), cx(3.4, -0.6), cx(5.2, 0.2)];
        assert!(check_reduction_formula(&p, &ys, true).unwrap() < 1e-9);
        assert!(check_reduction_formula(&p, &ys, false).unwrap() < 1e-9);
        let p = mp(8, 1, 2, Parity::Minus);
        assert!(check_reduction_formula(&p, &ys[..2], true).unwrap() < 1e-10);
        assert!(matches!(
            check_reduction_formula(&p, &[ys[0], ys[0]], true),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn canonical_form() {
        let p = mp(6, 2, 3, Parity::Minus);
        let x = cx(1.3, 0.4);
        for other in [-x, x + 12.0, -x - 24.0, x - 12.0] {
            let c = canonical_root(&p, other);
            assert!((c - x).norm() < 1e-12, "{other} -> {c}");
        }
        assert_eq!(canonical_root(&p, cx(0.0, -2.0)), cx(0.0, 2.0));
        assert_eq!(canonical_root(&p, cx(6.0, -2.0)), cx(6.0, 2.0));
        assert_eq!(canonical_root(&p, cx(-6.0, 2.0)), cx(6.0, 2.0));
    }

    #[test]
    fn solver_examples() {
        let cases = [
            (mp(6, 2, 3, Parity::Minus), AnsatzVariant::MinusFirst),
            (mp(6, 2, 3, Parity::Minus), AnsatzVariant::MinusSecond),
            (mp(6, 2, 2, Parity::Plus), AnsatzVariant::Plus),
        ];
        for (p, variant) in cases {
            let report = solve_bethe(&p, variant, &SolverConfig::for_params(&p)).unwrap();
            assert!(report.is_complete(), "{variant} {:?}", report.missing);
            assert_eq!(report.sets.len(), 3);
            for set in &report.sets {
                assert!(set.residual < 1e-9);
                assert!(set.u_spread < 1e-8);
                assert!((set.eigenvalue.re - set.spectral_value).abs() < 1e-6);
                let fresh = max_norm(&bethe_residuals(&p, variant, &set.roots).unwrap());
                assert!(fresh < 1e-9);
            }
        }
    }

    #[test]
    fn solver_through_rescaled_levels() {
        for (p, variant) in [
            (mp(6, 1, 3, Parity::Plus), AnsatzVariant::Plus),
            (mp(6, 2, 4, Parity::Minus), AnsatzVariant::MinusSecond),
            (mp(6, 4, 5, Parity::Minus), AnsatzVariant::MinusSecond),
        ] {
            let report = solve_bethe(&p, variant, &SolverConfig::for_params(&p)).unwrap();
            assert!(report.is_complete(), "{p:?} {variant} {:?}", report.missing);
        }
    }

    #[test]
    fn multistart_alone_finds_small_cases() {
        let p = mp(6, 2, 3, Parity::Minus);
        let config = SolverConfig {
            linearized_seeds: false,
            ..SolverConfig::for_params(&p)
        };
        for variant in [AnsatzVariant::MinusFirst, AnsatzVariant::MinusSecond] {
            let report = solve_bethe(&p, variant, &config).unwrap();
            assert!(report.is_complete(), "{variant} {:?}", report.missing);
            assert!(report.sets.iter().all(|s| matches!(s.source, RootSource::MultiStart { .. })));
        }
    }

    #[test]
    fn solver_is_deterministic() {
        let p = mp(6, 1, 3, Parity::Minus);
        let config = SolverConfig {
            linearized_seeds: false,
            ..SolverConfig::for_params(&p)
        };
        let a = solve_bethe(&p, AnsatzVariant::MinusSecond, &config).unwrap();
        let b = solve_bethe(&p, AnsatzVariant::MinusSecond, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn admissibility() {
        let p = mp(6, 2, 6, Parity::Minus);
        assert!(AnsatzVariant::MinusFirst.check_admissible(&p).is_err());
        let p = mp(6, 2, 6, Parity::Plus);
        assert!(AnsatzVariant::Plus.check_admissible(&p).is_err());
        assert!(AnsatzVariant::Plus.check_admissible(&mp(5, 2, 2, Parity::Plus)).is_err());
        let p = mp(6, 2, 2, Parity::Plus);
        assert!(AnsatzVariant::MinusFirst.check_admissible(&p).is_err());
        assert!(AnsatzVariant::Plus.check_admissible(&p).is_ok());
        // level -6 has s(2m) = sin(-pi) = 0 and uses the rescaled factor
        assert!(AnsatzVariant::Plus.check_admissible(&mp(6, 2, 3, Parity::Plus)).is_ok());
        assert!(AnsatzVariant::MinusSecond.check_admissible(&mp(6, 2, 4, Parity::Minus)).is_ok());
        assert_eq!("minus-second".parse::<AnsatzVariant>().unwrap(), AnsatzVariant::MinusSecond);
        assert_eq!(AnsatzVariant::MinusFirst.to_string(), "minus-first");
    }
}
