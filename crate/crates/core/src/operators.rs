//! Projectors, the time-and-band limiting operator, the Leonard pair and the
//! algebraic Heun operator that commutes with both projectors.
//!
//! Every operator is an explicit matrix in the coordinates of one parity
//! basis, tagged with its [`BasisKind`]. Products and sums of operators with
//! different tags are rejected.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::core_model::{check_same_basis, fourier_matrix, BasisKind, ModelParams, SignalVector};
use crate::error::{Error, Result};

/// Maximum deviation from Hermiticity tolerated by [`DenseOperator::hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-13;

/// Maximum distance of a vector from the range of the time projector for it
/// to count as time-limited, relative to its norm.
pub const SUPPORT_TOL: f64 = 1e-10;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    mat: DMatrix<Complex64>,
    basis: BasisKind,
    hermitian: bool,
}

impl DenseOperator {
    pub fn from_matrix(mat: DMatrix<Complex64>, basis: BasisKind) -> Self {
        assert!(mat.is_square(), "operators are square");
        DenseOperator {
            mat,
            basis,
            hermitian: false,
        }
    }

    pub fn from_real(mat: &DMatrix<f64>, basis: BasisKind) -> Self {
        DenseOperator::from_matrix(mat.map(|x| Complex64::new(x, 0.0)), basis)
    }

    /// Checks Hermiticity to [`HERMITIAN_TOL`], then symmetrizes to `(M + M^†) / 2`.
    pub fn hermitian(mat: DMatrix<Complex64>, basis: BasisKind) -> Result<Self> {
        let dev = max_modulus(&(&mat - mat.adjoint()));
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let sym = (&mat + mat.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(DenseOperator {
            mat: sym,
            basis,
            hermitian: true,
        })
    }

    pub fn identity(dim: usize, basis: BasisKind) -> Self {
        DenseOperator {
            mat: DMatrix::identity(dim, dim),
            basis,
            hermitian: true,
        }
    }

    pub fn zeros(dim: usize, basis: BasisKind) -> Self {
        DenseOperator {
            mat: DMatrix::zeros(dim, dim),
            basis,
            hermitian: true,
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn basis(&self) -> BasisKind {
        self.basis
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Real parts of the entries.
    pub fn real_part(&self) -> DMatrix<f64> {
        self.mat.map(|z| z.re)
    }

    fn check(&self, other: &DenseOperator) -> Result<()> {
        check_same_basis(self.basis, other.basis)?;
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.check(other)?;
        Ok(DenseOperator::from_matrix(&self.mat * &other.mat, self.basis))
    }

    pub fn add(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.check(other)?;
        Ok(DenseOperator {
            mat: &self.mat + &other.mat,
            basis: self.basis,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.check(other)?;
        Ok(DenseOperator {
            mat: &self.mat - &other.mat,
            basis: self.basis,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn scale(&self, factor: Complex64) -> DenseOperator {
        DenseOperator {
            mat: &self.mat * factor,
            basis: self.basis,
            hermitian: self.hermitian && factor.im == 0.0,
        }
    }

    /// `self + factor * I`
    pub fn shift(&self, factor: Complex64) -> DenseOperator {
        let mut mat = self.mat.clone();
        for i in 0..self.dim() {
            mat[(i, i)] += factor;
        }
        DenseOperator {
            mat,
            basis: self.basis,
            hermitian: self.hermitian && factor.im == 0.0,
        }
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.check(other)?;
        Ok(DenseOperator::from_matrix(
            &self.mat * &other.mat - &other.mat * &self.mat,
            self.basis,
        ))
    }

    /// `{self, other}`
    pub fn anticommutator(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.check(other)?;
        Ok(DenseOperator::from_matrix(
            &self.mat * &other.mat + &other.mat * &self.mat,
            self.basis,
        ))
    }

    pub fn apply(&self, v: &SignalVector) -> Result<SignalVector> {
        check_same_basis(self.basis, v.basis)?;
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: v.len(),
            });
        }
        Ok(SignalVector::new(&self.mat * &v.coeffs, self.basis))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        max_modulus(&self.mat)
    }

    /// Re-expresses a position-basis operator in momentum coordinates,
    /// `F M F^T` with `F` from [`fourier_matrix`].
    pub fn to_momentum(&self, p: &ModelParams) -> Result<DenseOperator> {
        check_same_basis(self.basis, p.position_kind())?;
        let f = fourier_matrix(p);
        let mat = f.matrix() * &self.mat * f.matrix().adjoint();
        Ok(DenseOperator {
            mat,
            basis: p.momentum_kind(),
            hermitian: self.hermitian,
        })
    }
}

/// Real symmetric tridiagonal operator. `offdiag[i]` couples coordinates
/// `i` and `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalOperator {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub basis: BasisKind,
}

impl TridiagonalOperator {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>, basis: BasisKind) -> Result<Self> {
        if !diag.is_empty() && offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                left: diag.len(),
                right: offdiag.len() + 1,
            });
        }
        Ok(TridiagonalOperator {
            diag,
            offdiag,
            basis,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DenseOperator {
        let d = self.dim();
        let mut m = DMatrix::<f64>::zeros(d, d);
        for (i, &b) in self.diag.iter().enumerate() {
            m[(i, i)] = b;
        }
        for (i, &a) in self.offdiag.iter().enumerate() {
            m[(i, i + 1)] = a;
            m[(i + 1, i)] = a;
        }
        let mut op = DenseOperator::from_real(&m, self.basis);
        op.hermitian = true;
        op
    }

    /// Leading principal block of size `size`.
    pub fn leading_block(&self, size: usize) -> TridiagonalOperator {
        let size = size.min(self.dim());
        TridiagonalOperator {
            diag: self.diag[..size].to_vec(),
            offdiag: self.offdiag[..size.saturating_sub(1)].to_vec(),
            basis: self.basis,
        }
    }
}

/// Time projector: the span of the position vectors `|j>` with `j <= L`.
pub fn projector_time(p: &ModelParams) -> DenseOperator {
    let d = p.dim();
    let rank = p.time_rank();
    let m = DMatrix::from_fn(d, d, |i, j| {
        if i == j && i < rank {
            ONE
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let mut op = DenseOperator::from_matrix(m, p.position_kind());
    op.hermitian = true;
    op
}

/// Band projector: the span of the momentum vectors `|theta_k>` with `k <= K`,
/// written in position coordinates.
pub fn projector_band(p: &ModelParams) -> DenseOperator {
    let f = fourier_matrix(p).real_part();
    let kept = f.rows(0, p.band_rank());
    let m = kept.transpose() * kept;
    DenseOperator::hermitian(m.map(|x| Complex64::new(x, 0.0)), p.position_kind())
        .expect("band projector is symmetric by construction")
}

/// Time-and-band limiting operator `Q = pi_1 pi_2 pi_1`.
pub fn tb_operator(p: &ModelParams) -> DenseOperator {
    let t = projector_time(p);
    let b = projector_band(p);
    let m = t.matrix() * b.matrix() * t.matrix();
    DenseOperator::hermitian(m, p.position_kind())
        .expect("product of projectors in this order is Hermitian")
}

/// `E = pi_2 pi_1`, whose singular values govern recoverability.
pub fn limiting_map(p: &ModelParams) -> DenseOperator {
    let t = projector_time(p);
    let b = projector_band(p);
    DenseOperator::from_matrix(b.matrix() * t.matrix(), p.position_kind())
}

/// The Leonard pair `(A, A*)` in the position basis: `A` hops to the
/// neighbouring labels, `A*` is diagonal with entries `2 c(2j)`.
pub fn leonard_pair(p: &ModelParams) -> (TridiagonalOperator, TridiagonalOperator) {
    let d = p.dim();
    let hop = (0..d.saturating_sub(1))
        .map(|i| {
            let j = p.label_of(i) as i64;
            p.rho_unchecked(j) * p.rho_unchecked(j + 1)
        })
        .map(|w| match p.parity() {
            crate::core_model::Parity::Plus => w,
            crate::core_model::Parity::Minus => 1.0,
        })
        .collect();
    let a = TridiagonalOperator {
        diag: vec![0.0; d],
        offdiag: hop,
        basis: p.position_kind(),
    };
    let a_star = TridiagonalOperator {
        diag: (0..d).map(|i| 2.0 * p.cr(2.0 * p.label_of(i) as f64)).collect(),
        offdiag: vec![0.0; d.saturating_sub(1)],
        basis: p.position_kind(),
    };
    (a, a_star)
}

/// Coefficients of `r1 {A,A*} + r2 [A,A*] + r3 A* + r4 A + r5`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HeunCoefficients {
    pub anticommutator: f64,
    pub commutator: f64,
    pub dual: f64,
    pub primary: f64,
    pub constant: f64,
}

impl HeunCoefficients {
    /// The member of the family that commutes with both projectors.
    pub fn time_band(p: &ModelParams) -> Self {
        let k = p.band_limit() as f64;
        let l = p.time_limit() as f64;
        HeunCoefficients {
            anticommutator: 1.0 / (4.0 * p.cr(1.0)),
            commutator: 0.0,
            dual: -p.cr(2.0 * k + 1.0),
            primary: -p.cr(2.0 * l + 1.0),
            constant: 0.0,
        }
    }
}

/// The general algebraic Heun operator built on a Leonard pair.
pub fn heun_general(
    a: &DenseOperator,
    a_star: &DenseOperator,
    r: &HeunCoefficients,
) -> Result<DenseOperator> {
    let anti = a.anticommutator(a_star)?;
    let comm = a.commutator(a_star)?;
    let re = |x: f64| Complex64::new(x, 0.0);
    let t = anti
        .scale(re(r.anticommutator))
        .add(&comm.scale(re(r.commutator)))?
        .add(&a_star.scale(re(r.dual)))?
        .add(&a.scale(re(r.primary)))?
        .shift(re(r.constant));
    Ok(t)
}

fn heun_tridiagonal(p: &ModelParams, diag_limit: usize, hop_limit: usize, basis: BasisKind) -> TridiagonalOperator {
    let d = p.dim();
    let diag_factor = -2.0 * p.cr(2.0 * diag_limit as f64 + 1.0);
    let diag = (0..d)
        .map(|i| diag_factor * p.cr(2.0 * p.label_of(i) as f64))
        .collect();
    let offdiag = (0..d.saturating_sub(1))
        .map(|i| {
            let j = p.label_of(i);
            let weight = match p.parity() {
                crate::core_model::Parity::Plus => {
                    p.rho_unchecked(j as i64) * p.rho_unchecked(j as i64 + 1)
                }
                crate::core_model::Parity::Minus => 1.0,
            };
            // c(2j+1) - c(2h+1) = -2 s(j+h+1) s(j-h): exact zeros at j = h and j + h + 1 = 2n
            let (j, h) = (j as f64, hop_limit as f64);
            -2.0 * weight * p.sr(j + h + 1.0) * p.sr(j - h)
        })
        .collect();
    TridiagonalOperator {
        diag,
        offdiag,
        basis,
    }
}

/// `T` in the position basis:
/// `b_j = -2 c(2K+1) c(2j)`, `a_{j+1} = c_j = rho(j) rho(j+1) (c(2j+1) - c(2L+1))`
/// (the `rho` weights only in the symmetric sector).
pub fn heun_tb(p: &ModelParams) -> TridiagonalOperator {
    heun_tridiagonal(p, p.band_limit(), p.time_limit(), p.position_kind())
}

/// `T` in the momentum basis: the position form with the roles of `K` and
/// `L` exchanged.
pub fn heun_tb_momentum(p: &ModelParams) -> TridiagonalOperator {
    heun_tridiagonal(p, p.time_limit(), p.band_limit(), p.momentum_kind())
}

/// Max-norm residuals of the two cubic Askey–Wilson relations
/// `A²A* - 2c(2) A A* A + A* A² = 4 s(2)² A*` and its dual.
pub fn check_askey_wilson(p: &ModelParams) -> (f64, f64) {
    let (a, a_star) = leonard_pair(p);
    let a = a.to_dense().real_part();
    let s = a_star.to_dense().real_part();
    let c2 = p.cr(2.0);
    let rhs = 4.0 * p.sr(2.0).powi(2);
    let first = &a * &a * &s - 2.0 * c2 * &a * &s * &a + &s * &a * &a - rhs * &s;
    let second = &s * &s * &a - 2.0 * c2 * &s * &a * &s + &a * &s * &s - rhs * &a;
    (amax(&first), amax(&second))
}

fn amax(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.amax()
    }
}

/// Max-norm residuals of the Leonard-pair duality: `F A F^T` should be
/// `diag(2 c(2k))` and `F A* F^T` should be the tridiagonal hop pattern.
pub fn leonard_duality_residuals(p: &ModelParams) -> (f64, f64) {
    let (a, a_star) = leonard_pair(p);
    let a_mom = a.to_dense().to_momentum(p).expect("position basis");
    let s_mom = a_star.to_dense().to_momentum(p).expect("position basis");
    // the momentum-side pattern has the same shape as the position-side one
    let expected_a = a_star.to_dense().into_matrix();
    let expected_s = a.to_dense().into_matrix();
    let r1 = residual(a_mom.matrix(), &expected_a);
    let r2 = residual(s_mom.matrix(), &expected_s);
    (r1, r2)
}

fn residual(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    max_modulus(&(a - b))
}

/// Largest entry modulus of a complex matrix (0 for an empty one).
pub fn max_modulus(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-norm commutators of `T` with the two projectors and with `Q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutationResiduals {
    pub time: f64,
    pub band: f64,
    pub tb: f64,
}

impl CommutationResiduals {
    pub fn max(&self) -> f64 {
        self.time.max(self.band).max(self.tb)
    }
}

pub fn commutation_residuals(p: &ModelParams) -> CommutationResiduals {
    let t = heun_tb(p).to_dense();
    let norm = |m: Result<DenseOperator>| m.expect("same basis").max_abs();
    CommutationResiduals {
        time: norm(t.commutator(&projector_time(p))),
        band: norm(t.commutator(&projector_band(p))),
        tb: norm(t.commutator(&tb_operator(p))),
    }
}

/// `||pi_2 f|| / ||f||` for a time-limited `f` in position coordinates.
pub fn concentration_ratio(f: &SignalVector, p: &ModelParams) -> Result<f64> {
    check_same_basis(f.basis, p.position_kind())?;
    if f.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            left: f.len(),
            right: p.dim(),
        });
    }
    let norm = f.norm();
    if norm == 0.0 {
        return Err(Error::Domain("zero vector has no concentration ratio".into()));
    }
    let outside: f64 = f
        .coeffs
        .iter()
        .skip(p.time_rank())
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if outside > SUPPORT_TOL * norm {
        return Err(Error::Domain(format!(
            "vector is not time-limited (off-window mass {outside:e})"
        )));
    }
    let band = projector_band(p).apply(f)?;
    Ok(band.norm() / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_model::Parity;

    fn mp(n: usize, k: usize, l: usize, parity: Parity) -> ModelParams {
        ModelParams::new(n, k, l, parity).unwrap()
    }

    fn all_params(max_n: usize) -> Vec<ModelParams> {
        let mut out = Vec::new();
        for n in 2..=max_n {
            for k in 0..=n {
                for l in 0..=n {
                    for parity in [Parity::Plus, Parity::Minus] {
                        out.push(mp(n, k, l, parity));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn time_projector_examples() {
        let p = mp(5, 2, 5, Parity::Plus);
        assert_eq!(projector_time(&p), DenseOperator::identity(6, p.position_kind()));
        let m = mp(4, 0, 2, Parity::Minus);
        let diag: Vec<f64> = (0..3).map(|i| projector_time(&m).matrix()[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn band_projector_examples() {
        let p = mp(5, 5, 2, Parity::Plus);
        let id = DenseOperator::identity(6, p.position_kind());
        assert!(projector_band(&p).sub(&id).unwrap().max_abs() < 1e-14);

        let m = mp(4, 1, 2, Parity::Minus);
        let theta1 = &crate::core_model::momentum_basis(&m)[0];
        let pos = crate::core_model::position_basis(&m);
        let coords = nalgebra::DVector::from_iterator(3, pos.iter().map(|e| e.dot(theta1)));
        let outer = &coords * coords.transpose();
        let band = projector_band(&m).real_part();
        assert!((band - outer).amax() < 1e-14);
    }

    #[test]
    fn projectors_are_idempotent() {
        for p in all_params(9) {
            for proj in [projector_time(&p), projector_band(&p)] {
                let sq = proj.mul(&proj).unwrap();
                assert!(sq.sub(&proj).unwrap().max_abs() < 1e-14);
                assert!(proj.is_hermitian());
            }
        }
    }

    #[test]
    fn tb_operator_examples() {
        let p = mp(6, 6, 3, Parity::Plus);
        assert!(tb_operator(&p).sub(&projector_time(&p)).unwrap().max_abs() < 1e-14);

        let m = mp(4, 2, 2, Parity::Minus);
        let t = projector_time(&m).into_matrix();
        let b = projector_band(&m).into_matrix();
        let brute = &t * &b * &t;
        assert!(max_modulus(&(tb_operator(&m).into_matrix() - brute)) < 1e-13);

        let e = limiting_map(&m);
        let ee = e.matrix().adjoint() * e.matrix();
        assert!(max_modulus(&(ee - tb_operator(&m).into_matrix())) < 1e-13);
    }

    #[test]
    fn leonard_pair_examples() {
        let m = mp(3, 0, 0, Parity::Minus);
        let (a, s) = leonard_pair(&m);
        assert_eq!(a.offdiag, vec![1.0]);
        assert_eq!(a.diag, vec![0.0, 0.0]);
        assert!((s.diag[0] - 1.0).abs() < 1e-15);
        assert!((s.diag[1] + 1.0).abs() < 1e-15);

        let p = mp(4, 0, 0, Parity::Plus);
        let (a, _) = leonard_pair(&p);
        assert!((a.offdiag[0] - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!((a.offdiag[3] - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn heun_general_trivial_cases() {
        let p = mp(5, 2, 3, Parity::Plus);
        let (a, s) = leonard_pair(&p);
        let (a, s) = (a.to_dense(), s.to_dense());
        let constant = HeunCoefficients {
            constant: 1.0,
            ..Default::default()
        };
        let id = heun_general(&a, &s, &constant).unwrap();
        assert!(id.sub(&DenseOperator::identity(6, p.position_kind())).unwrap().max_abs() < 1e-15);
        let comm = HeunCoefficients {
            commutator: 1.0,
            ..Default::default()
        };
        assert_eq!(heun_general(&a, &a, &comm).unwrap().max_abs(), 0.0);

        let other = mp(5, 2, 3, Parity::Minus);
        let wrong = leonard_pair(&other).0.to_dense();
        assert!(heun_general(&a, &wrong, &comm).is_err());
    }

    #[test]
    fn heun_tb_matches_general_form() {
        for p in all_params(12) {
            let (a, s) = leonard_pair(&p);
            let general =
                heun_general(&a.to_dense(), &s.to_dense(), &HeunCoefficients::time_band(&p)).unwrap();
            let t = heun_tb(&p).to_dense();
            assert!(t.sub(&general).unwrap().max_abs() < 1e-13, "{p:?}");
        }
    }

    #[test]
    fn heun_tb_coefficients() {
        let m = mp(4, 1, 2, Parity::Minus);
        let t = heun_tb(&m);
        let expected = -2.0 * (3.0 * std::f64::consts::PI / 8.0).cos() * (std::f64::consts::PI / 4.0).cos();
        assert!((t.diag[0] - expected).abs() < 1e-15);

        let m = mp(4, 2, 1, Parity::Minus);
        let tm = heun_tb_momentum(&m);
        assert!((tm.diag[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn heun_tb_decouples_exactly_at_time_limit() {
        for p in all_params(16) {
            let t = heun_tb(&p);
            let tm = heun_tb_momentum(&p);
            let cut = p.time_rank();
            if cut >= 1 && cut < p.dim() {
                assert_eq!(t.offdiag[cut - 1], 0.0, "{p:?}");
            }
            let band_cut = p.band_rank();
            if band_cut >= 1 && band_cut < p.dim() {
                assert_eq!(tm.offdiag[band_cut - 1], 0.0, "{p:?}");
            }
        }
    }

    #[test]
    fn momentum_form_is_conjugate() {
        for p in all_params(10) {
            let t = heun_tb(&p).to_dense().to_momentum(&p).unwrap();
            let tm = heun_tb_momentum(&p).to_dense();
            assert!(t.sub(&tm).unwrap().max_abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn askey_wilson_small_cases() {
        let (r1, r2) = check_askey_wilson(&mp(3, 0, 0, Parity::Minus));
        assert!(r1 < 1e-14 && r2 < 1e-14);
        let (r1, r2) = check_askey_wilson(&mp(8, 0, 0, Parity::Plus));
        assert!(r1 < 1e-13 && r2 < 1e-13);
        let (r1, r2) = check_askey_wilson(&mp(2, 0, 0, Parity::Minus));
        assert_eq!((r1, r2), (0.0, 0.0));
    }

    #[test]
    fn leonard_duality() {
        for p in all_params(10) {
            let (r1, r2) = leonard_duality_residuals(&p);
            assert!(r1 < 1e-12 && r2 < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn commutation() {
        for p in all_params(10) {
            assert!(commutation_residuals(&p).max() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn concentration_errors() {
        let p = mp(6, 2, 3, Parity::Plus);
        let zero = SignalVector::zeros(7, p.position_kind());
        assert!(concentration_ratio(&zero, &p).is_err());
        let outside = SignalVector::unit(7, 6, p.position_kind());
        assert!(concentration_ratio(&outside, &p).is_err());
        let wrong_basis = SignalVector::unit(7, 0, p.momentum_kind());
        assert!(concentration_ratio(&wrong_basis, &p).is_err());
        let full = mp(6, 6, 3, Parity::Plus);
        let f = SignalVector::from_real(&[1.0, -2.0, 0.5, 3.0, 0.0, 0.0, 0.0], p.position_kind());
        assert!((concentration_ratio(&f, &full).unwrap() - 1.0).abs() < 1e-14);
    }
}
