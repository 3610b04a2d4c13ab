//! Problem parameters, grid trigonometry and the orthonormal bases of the
//! parity subspaces.
//!
//! Functions live on `Z/2nZ`. The reflection `j -> 2n - j` splits that space
//! into a symmetric part of dimension `n + 1` and an antisymmetric part of
//! dimension `n - 1`; every operator in this crate acts on one of them.
//!
//! All trigonometric arguments are in *grid units*: [`ModelParams::trig_s`]
//! evaluates `sin(pi x / 2n)` and [`ModelParams::trig_c`] evaluates
//! `cos(pi x / 2n)`. Both are `4n`-periodic and accept complex `x`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::DenseOperator;

/// Complex argument measured in grid units.
pub type GridValue = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Plus => 1.0,
            Parity::Minus => -1.0,
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Parity::Plus => f.write_str("plus"),
            Parity::Minus => f.write_str("minus"),
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Parity::Plus),
            "minus" | "-" => Ok(Parity::Minus),
            other => Err(Error::InvalidParams(format!("unknown parity {other:?}"))),
        }
    }
}

/// Which basis a vector's coordinates or an operator's matrix refer to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisKind {
    PositionPlus,
    PositionMinus,
    MomentumPlus,
    MomentumMinus,
}

impl BasisKind {
    pub fn parity(self) -> Parity {
        match self {
            BasisKind::PositionPlus | BasisKind::MomentumPlus => Parity::Plus,
            BasisKind::PositionMinus | BasisKind::MomentumMinus => Parity::Minus,
        }
    }

    pub fn is_position(self) -> bool {
        matches!(self, BasisKind::PositionPlus | BasisKind::PositionMinus)
    }
}

/// The problem instance: half-dimension `n`, band limit `K`, time limit `L`
/// and the parity sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelParams {
    n: usize,
    band_limit: usize,
    time_limit: usize,
    parity: Parity,
}

impl ModelParams {
    pub fn new(n: usize, band_limit: usize, time_limit: usize, parity: Parity) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        if parity == Parity::Minus && n < 2 {
            return Err(Error::InvalidParams(
                "the antisymmetric sector needs n >= 2".into(),
            ));
        }
        if band_limit > n {
            return Err(Error::InvalidParams(format!(
                "band limit K = {band_limit} exceeds n = {n}"
            )));
        }
        if time_limit > n {
            return Err(Error::InvalidParams(format!(
                "time limit L = {time_limit} exceeds n = {n}"
            )));
        }
        Ok(ModelParams {
            n,
            band_limit,
            time_limit,
            parity,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `K`
    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    /// `L`
    pub fn time_limit(&self) -> usize {
        self.time_limit
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Same `(n, K, L)` in the other parity sector.
    pub fn with_parity(&self, parity: Parity) -> Result<Self> {
        ModelParams::new(self.n, self.band_limit, self.time_limit, parity)
    }

    /// Dimension of the parity subspace.
    pub fn dim(&self) -> usize {
        match self.parity {
            Parity::Plus => self.n + 1,
            Parity::Minus => self.n - 1,
        }
    }

    /// Length of the ambient vectors, `2n`.
    pub fn ambient_dim(&self) -> usize {
        2 * self.n
    }

    pub fn position_kind(&self) -> BasisKind {
        match self.parity {
            Parity::Plus => BasisKind::PositionPlus,
            Parity::Minus => BasisKind::PositionMinus,
        }
    }

    pub fn momentum_kind(&self) -> BasisKind {
        match self.parity {
            Parity::Plus => BasisKind::MomentumPlus,
            Parity::Minus => BasisKind::MomentumMinus,
        }
    }

    /// Label of the first basis vector: `|0,+>` or `|1,->`.
    pub fn first_label(&self) -> usize {
        match self.parity {
            Parity::Plus => 0,
            Parity::Minus => 1,
        }
    }

    /// Basis label `j` (position) or `k` (momentum) stored at coordinate `idx`.
    pub fn label_of(&self, idx: usize) -> usize {
        idx + self.first_label()
    }

    /// Coordinate index of basis label `j`, if that label spans a basis vector.
    pub fn index_of(&self, label: usize) -> Option<usize> {
        let first = self.first_label();
        (label >= first && label - first < self.dim()).then(|| label - first)
    }

    /// Number of position vectors kept by the time projector, i.e. the
    /// dimension of its range.
    pub fn time_rank(&self) -> usize {
        self.kept_count(self.time_limit)
    }

    /// Number of momentum vectors kept by the band projector.
    pub fn band_rank(&self) -> usize {
        self.kept_count(self.band_limit)
    }

    fn kept_count(&self, limit: usize) -> usize {
        match self.parity {
            Parity::Plus => limit + 1,
            Parity::Minus => limit.min(self.n - 1),
        }
    }

    /// `sin(pi x / 2n)`
    pub fn trig_s(&self, x: GridValue) -> Complex64 {
        sin_cos_grid(x, self.n as f64).0
    }

    /// `cos(pi x / 2n)`
    pub fn trig_c(&self, x: GridValue) -> Complex64 {
        sin_cos_grid(x, self.n as f64).1
    }

    /// Real-argument shorthand for [`trig_s`](Self::trig_s).
    pub fn sr(&self, x: f64) -> f64 {
        self.trig_s(Complex64::new(x, 0.0)).re
    }

    /// Real-argument shorthand for [`trig_c`](Self::trig_c).
    pub fn cr(&self, x: f64) -> f64 {
        self.trig_c(Complex64::new(x, 0.0)).re
    }

    /// Normalisation weight: `sqrt(2)` at the fixed points `0` and `n`, `1`
    /// in between and `0` at the conventional outer labels `-1` and `n + 1`.
    pub fn rho(&self, j: i64) -> Result<f64> {
        let n = self.n as i64;
        match j {
            _ if j == -1 || j == n + 1 => Ok(0.0),
            _ if j == 0 || j == n => Ok(SQRT_2),
            _ if (1..n).contains(&j) => Ok(1.0),
            _ => Err(Error::Domain(format!("rho({j}) outside [-1, {}]", n + 1))),
        }
    }

    /// `rho` for labels known to lie in `[-1, n + 1]`.
    pub(crate) fn rho_unchecked(&self, j: i64) -> f64 {
        self.rho(j).unwrap_or(0.0)
    }
}

/// A coordinate vector in one of the parity bases.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalVector {
    pub coeffs: DVector<Complex64>,
    pub basis: BasisKind,
}

impl SignalVector {
    pub fn new(coeffs: DVector<Complex64>, basis: BasisKind) -> Self {
        SignalVector { coeffs, basis }
    }

    pub fn from_real(coeffs: &[f64], basis: BasisKind) -> Self {
        SignalVector {
            coeffs: DVector::from_iterator(
                coeffs.len(),
                coeffs.iter().map(|&x| Complex64::new(x, 0.0)),
            ),
            basis,
        }
    }

    pub fn zeros(dim: usize, basis: BasisKind) -> Self {
        SignalVector {
            coeffs: DVector::zeros(dim),
            basis,
        }
    }

    /// Unit vector on coordinate `idx`.
    pub fn unit(dim: usize, idx: usize, basis: BasisKind) -> Self {
        let mut v = SignalVector::zeros(dim, basis);
        v.coeffs[idx] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &SignalVector) -> Result<Complex64> {
        check_same_basis(self.basis, other.basis)?;
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(self.coeffs.dotc(&other.coeffs))
    }

    /// Values on `Z/2nZ` of the function these coordinates describe.
    pub fn to_ambient(&self, p: &ModelParams) -> Result<DVector<Complex64>> {
        if self.basis.parity() != p.parity() || self.len() != p.dim() {
            return Err(Error::DimensionMismatch {
                left: self.len(),
                right: p.dim(),
            });
        }
        let basis = if self.basis.is_position() {
            position_basis(p)
        } else {
            momentum_basis(p)
        };
        let mut out = DVector::<Complex64>::zeros(p.ambient_dim());
        for (c, b) in self.coeffs.iter().zip(basis.iter()) {
            for (o, &bx) in out.iter_mut().zip(b.iter()) {
                *o += c * bx;
            }
        }
        Ok(out)
    }

    /// Coordinates of an ambient function in the position basis of `p`.
    /// Components outside the parity sector are dropped.
    pub fn from_ambient(f: &DVector<Complex64>, p: &ModelParams) -> Result<Self> {
        if f.len() != p.ambient_dim() {
            return Err(Error::DimensionMismatch {
                left: f.len(),
                right: p.ambient_dim(),
            });
        }
        let coeffs = position_basis(p)
            .iter()
            .map(|b| b.iter().zip(f.iter()).map(|(&bx, fx)| bx * fx).sum())
            .collect::<Vec<Complex64>>();
        Ok(SignalVector::new(
            DVector::from_vec(coeffs),
            p.position_kind(),
        ))
    }
}

/// `(sin(pi x / 2n), cos(pi x / 2n))` with the real part reduced by quarter
/// turns first, so the zeros at multiples of `n` come out exact.
fn sin_cos_grid(x: Complex64, n: f64) -> (Complex64, Complex64) {
    // a quarter turn is n grid units; reducing before scaling keeps integer
    // arguments exact, and ties-to-even sends x and 4kn - x to mirrored quarters
    let quarter = (x.re / n).round_ties_even();
    let r = Complex64::new(x.re - quarter * n, x.im) * (PI / (2.0 * n));
    let (s, c) = if r.im == 0.0 {
        let (s, c) = r.re.sin_cos();
        (Complex64::new(s, 0.0), Complex64::new(c, 0.0))
    } else {
        (r.sin(), r.cos())
    };
    match quarter.rem_euclid(4.0) as u8 {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

pub(crate) fn check_same_basis(left: BasisKind, right: BasisKind) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::BasisMismatch { left, right })
    }
}

/// Position basis `|j,+> = (delta_j + delta_{2n-j}) / (rho(j) sqrt 2)` or
/// `|j,-> = (delta_j - delta_{2n-j}) / sqrt 2`, as ambient vectors of length `2n`.
pub fn position_basis(p: &ModelParams) -> Vec<DVector<f64>> {
    let two_n = p.ambient_dim();
    let sign = p.parity().sign();
    (0..p.dim())
        .map(|idx| {
            let j = p.label_of(idx);
            let norm = p.rho_unchecked(j as i64) * SQRT_2;
            let mut v = DVector::zeros(two_n);
            v[j % two_n] += 1.0 / norm;
            v[(two_n - j) % two_n] += sign / norm;
            v
        })
        .collect()
}

/// Momentum basis `|theta_k,+> = c_{2k} / (rho(k) sqrt n)` or
/// `|theta_k,-> = s_{2k} / sqrt n`. The zero vectors at `k = 0, n` of the
/// antisymmetric sector are left out.
pub fn momentum_basis(p: &ModelParams) -> Vec<DVector<f64>> {
    let n = p.n() as f64;
    (0..p.dim())
        .map(|idx| {
            let k = p.label_of(idx) as f64;
            DVector::from_iterator(
                p.ambient_dim(),
                (0..p.ambient_dim()).map(|x| {
                    let arg = 2.0 * k * x as f64;
                    match p.parity() {
                        Parity::Plus => p.cr(arg) / (p.rho_unchecked(k as i64) * n.sqrt()),
                        Parity::Minus => p.sr(arg) / n.sqrt(),
                    }
                }),
            )
        })
        .collect()
}

/// Real change-of-basis matrix with entries `F[k][j] = <theta_k|j>`: its
/// columns are the position vectors written in momentum coordinates, so it
/// maps position coordinates to momentum coordinates.
pub fn fourier_matrix(p: &ModelParams) -> DenseOperator {
    let scale = (2.0 / p.n() as f64).sqrt();
    let d = p.dim();
    let m = DMatrix::from_fn(d, d, |ki, ji| {
        let k = p.label_of(ki) as f64;
        let j = p.label_of(ji) as f64;
        let entry = match p.parity() {
            Parity::Plus => {
                scale * p.cr(2.0 * k * j)
                    / (p.rho_unchecked(k as i64) * p.rho_unchecked(j as i64))
            }
            Parity::Minus => scale * p.sr(2.0 * k * j),
        };
        Complex64::new(entry, 0.0)
    });
    DenseOperator::from_matrix(m, p.momentum_kind())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, parity: Parity) -> ModelParams {
        ModelParams::new(n, 0, 0, parity).unwrap()
    }

    #[test]
    fn trig_values() {
        let p = params(2, Parity::Plus);
        assert!((p.trig_s(Complex64::new(2.0, 0.0)) - 1.0).norm() < 1e-15);
        assert_eq!(p.trig_s(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        let p4 = params(4, Parity::Plus);
        assert!(p4.trig_s(Complex64::new(8.0, 0.0)).norm() < 1e-15);
        let p3 = params(3, Parity::Plus);
        assert_eq!(p3.trig_c(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
        assert!(p3.trig_c(Complex64::new(3.0, 0.0)).norm() < 1e-15);
        assert!((p3.trig_c(Complex64::new(2.0, 0.0)) - 0.5).norm() < 1e-15);
    }

    #[test]
    fn trig_symmetry_and_period() {
        let p = params(5, Parity::Plus);
        for &(re, im) in &[(0.3, 0.2), (-1.7, 0.5), (4.1, -0.9)] {
            let x = Complex64::new(re, im);
            let period = Complex64::new(20.0, 0.0);
            assert!((p.trig_s(x + period) - p.trig_s(x)).norm() < 1e-13);
            assert!((p.trig_c(x + period) - p.trig_c(x)).norm() < 1e-13);
            assert!((p.trig_s(-x) + p.trig_s(x)).norm() < 1e-15);
            assert!((p.trig_c(-x) - p.trig_c(x)).norm() < 1e-15);
        }
    }

    #[test]
    fn rho_values() {
        let p = params(5, Parity::Plus);
        assert_eq!(p.rho(0).unwrap(), SQRT_2);
        assert_eq!(p.rho(5).unwrap(), SQRT_2);
        assert_eq!(p.rho(3).unwrap(), 1.0);
        assert_eq!(p.rho(-1).unwrap(), 0.0);
        assert_eq!(p.rho(6).unwrap(), 0.0);
        assert!(p.rho(7).is_err());
        assert!(p.rho(-2).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ModelParams::new(0, 0, 0, Parity::Plus).is_err());
        assert!(ModelParams::new(1, 0, 0, Parity::Minus).is_err());
        assert!(ModelParams::new(4, 5, 0, Parity::Plus).is_err());
        assert!(ModelParams::new(4, 0, 5, Parity::Plus).is_err());
        let p = ModelParams::new(4, 4, 4, Parity::Minus).unwrap();
        assert_eq!(p.dim(), 3);
        assert_eq!(p.with_parity(Parity::Plus).unwrap().dim(), 5);
    }

    #[test]
    fn position_basis_examples() {
        let p = params(2, Parity::Plus);
        let b = position_basis(&p);
        assert_eq!(b.len(), 3);
        assert!((b[0].clone() - DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0])).amax() < 1e-15);

        let m = params(2, Parity::Minus);
        let b = position_basis(&m);
        let h = 1.0 / SQRT_2;
        assert_eq!(b.len(), 1);
        assert!((b[0].clone() - DVector::from_vec(vec![0.0, h, 0.0, -h])).amax() < 1e-15);
    }

    #[test]
    fn momentum_basis_examples() {
        let m = params(2, Parity::Minus);
        let b = momentum_basis(&m);
        let h = 1.0 / SQRT_2;
        assert_eq!(b.len(), 1);
        assert!((b[0].clone() - DVector::from_vec(vec![0.0, h, 0.0, -h])).amax() < 1e-15);

        let p = params(3, Parity::Plus);
        let b = momentum_basis(&p);
        let c = 1.0 / 6.0_f64.sqrt();
        assert!(b[0].iter().all(|&x| (x - c).abs() < 1e-15));
    }

    fn gram_residual(basis: &[DVector<f64>]) -> f64 {
        let mut worst = 0.0_f64;
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b) - target).abs());
            }
        }
        worst
    }

    #[test]
    fn bases_are_orthonormal_and_symmetric() {
        for n in [2, 3, 5, 16, 40] {
            for parity in [Parity::Plus, Parity::Minus] {
                let p = params(n, parity);
                for basis in [position_basis(&p), momentum_basis(&p)] {
                    assert_eq!(basis.len(), p.dim());
                    assert!(gram_residual(&basis) < 1e-13, "n={n} {parity}");
                    for v in &basis {
                        for j in 0..2 * n {
                            let mirror = (2 * n - j) % (2 * n);
                            assert!((v[j] - parity.sign() * v[mirror]).abs() < 1e-14);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn fourier_matrix_matches_inner_products() {
        for n in [2, 4, 7, 12] {
            for parity in [Parity::Plus, Parity::Minus] {
                let p = params(n, parity);
                let f = fourier_matrix(&p);
                let pos = position_basis(&p);
                let mom = momentum_basis(&p);
                for (k, th) in mom.iter().enumerate() {
                    for (j, e) in pos.iter().enumerate() {
                        assert!((f.matrix()[(k, j)].re - th.dot(e)).abs() < 1e-13);
                    }
                }
                let ftf = f.matrix().adjoint() * f.matrix();
                let id = DMatrix::<Complex64>::identity(p.dim(), p.dim());
                assert!(crate::operators::max_modulus(&(ftf - id)) < 1e-13);
            }
        }
        let m = params(2, Parity::Minus);
        assert!((fourier_matrix(&m).matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ambient_round_trip() {
        let p = ModelParams::new(5, 2, 3, Parity::Minus).unwrap();
        let v = SignalVector::from_real(&[0.3, -1.0, 2.0, 0.5], p.position_kind());
        let amb = v.to_ambient(&p).unwrap();
        let back = SignalVector::from_ambient(&amb, &p).unwrap();
        assert!((&back.coeffs - &v.coeffs).norm() < 1e-14);
        assert!((amb.norm() - v.norm()).abs() < 1e-14);
    }
}
