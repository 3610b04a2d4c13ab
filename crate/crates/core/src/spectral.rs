//! Eigensolvers and the joint spectrum of `T` and `Q`.
//!
//! [`eig_sym_tridiag`] is an implicit-shift QL iteration on symmetric
//! tridiagonal matrices. [`eig_sym_dense`] wraps nalgebra's Hermitian
//! eigensolver and is used as the independent reference for it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::core_model::{ModelParams, SignalVector};
use crate::error::{Error, Result};
use crate::operators::{heun_tb, limiting_map, tb_operator, DenseOperator, TridiagonalOperator};

/// Relative size below which a subdiagonal entry counts as converged.
pub const QL_CONVERGENCE_TOL: f64 = 1e-15;

/// QL sweeps allowed per unit of block dimension.
pub const QL_SWEEPS_PER_DIM: usize = 50;

/// Largest `||Qv - qv||` accepted for a joint eigenvector.
pub const JOINT_RESIDUAL_TOL: f64 = 1e-10;

/// Eigenvalues of `T` closer than this are treated as one eigenspace when
/// `Q` has to be diagonalized inside it.
const DEGENERACY_GAP: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: SignalVector,
    /// `||M v - value v||_2`
    pub residual: f64,
}

/// Eigenpairs sorted by ascending eigenvalue.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Spectrum {
    pub pairs: Vec<EigenPair>,
}

impl Spectrum {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    /// `max |<v_i|v_j> - delta_ij|`
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, a) in self.pairs.iter().enumerate() {
            for (j, b) in self.pairs.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                let g = a.vector.coeffs.dotc(&b.vector.coeffs);
                worst = worst.max((g - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Full eigendecomposition of a symmetric tridiagonal operator.
///
/// The matrix is first split wherever an off-diagonal entry is exactly zero;
/// each unreduced block must come out with strictly distinct eigenvalues.
pub fn eig_sym_tridiag(t: &TridiagonalOperator) -> Result<Spectrum> {
    let d = t.dim();
    let mut pairs = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && t.offdiag[end - 1] != 0.0 {
            end += 1;
        }
        let mut diag = t.diag[start..end].to_vec();
        let mut sub = t.offdiag[start..end - 1].to_vec();
        sub.push(0.0);
        let mut z = DMatrix::<f64>::identity(end - start, end - start);
        tql2(&mut diag, &mut sub, Some(&mut z)).map_err(|iterations| Error::NoConvergence {
            start,
            end,
            iterations,
        })?;
        for w in diag.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::DegenerateSpectrum {
                    start,
                    end,
                    value: w[0],
                });
            }
        }
        for (k, &value) in diag.iter().enumerate() {
            let mut v = DVector::<f64>::zeros(d);
            v.rows_mut(start, end - start).copy_from(&z.column(k));
            let residual = tridiag_residual(t, &v, value);
            pairs.push(EigenPair {
                value,
                vector: SignalVector::new(v.map(|x| Complex64::new(x, 0.0)), t.basis),
                residual,
            });
        }
        start = end;
    }
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(Spectrum { pairs })
}

/// Eigenvalues only, ascending. Same splitting and failure modes as
/// [`eig_sym_tridiag`] at a fraction of the cost.
pub fn tridiag_eigenvalues(t: &TridiagonalOperator) -> Result<Vec<f64>> {
    let d = t.dim();
    let mut values = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && t.offdiag[end - 1] != 0.0 {
            end += 1;
        }
        let mut diag = t.diag[start..end].to_vec();
        let mut sub = t.offdiag[start..end - 1].to_vec();
        sub.push(0.0);
        tql2(&mut diag, &mut sub, None).map_err(|iterations| Error::NoConvergence {
            start,
            end,
            iterations,
        })?;
        if let Some(w) = diag.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::DegenerateSpectrum {
                start,
                end,
                value: w[0],
            });
        }
        values.extend(diag);
        start = end;
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn tridiag_residual(t: &TridiagonalOperator, v: &DVector<f64>, value: f64) -> f64 {
    let d = t.dim();
    (0..d)
        .map(|i| {
            let mut acc = (t.diag[i] - value) * v[i];
            if i > 0 {
                acc += t.offdiag[i - 1] * v[i - 1];
            }
            if i + 1 < d {
                acc += t.offdiag[i] * v[i + 1];
            }
            acc * acc
        })
        .sum::<f64>()
        .sqrt()
}

/// Implicit QL with Wilkinson-style shifts (the EISPACK `tql2` scheme).
///
/// `d` holds the diagonal, `e[i]` couples `i` and `i + 1` with `e[len-1] = 0`.
/// On success `d` holds ascending eigenvalues and the columns of `z` the
/// eigenvectors (when given). On failure returns the number of iterations spent.
fn tql2(d: &mut [f64], e: &mut [f64], mut z: Option<&mut DMatrix<f64>>) -> std::result::Result<(), usize> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let cap = QL_SWEEPS_PER_DIM * n;
    let mut iterations = 0;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > QL_CONVERGENCE_TOL * tst1 {
            m += 1;
        }
        if m > l {
            loop {
                iterations += 1;
                if iterations > cap {
                    return Err(iterations);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..n {
                            let h = z[(k, i + 1)];
                            z[(k, i + 1)] = s * z[(k, i)] + c * h;
                            z[(k, i)] = c * z[(k, i)] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= QL_CONVERGENCE_TOL * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // selection sort keeps eigenvector columns paired with their values
    for i in 0..n - 1 {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            if let Some(z) = z.as_deref_mut() {
                z.swap_columns(i, k);
            }
        }
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian operator.
pub fn eig_sym_dense(m: &DenseOperator) -> Result<Spectrum> {
    if !m.is_hermitian() {
        let dev = crate::operators::max_modulus(&(m.matrix() - m.matrix().adjoint()));
        return Err(Error::NotHermitian(dev));
    }
    if m.dim() == 0 {
        return Ok(Spectrum::default());
    }
    // real symmetric input (every operator built here) takes the faster real path
    let (values, vectors) = if m.matrix().iter().all(|z| z.im == 0.0) {
        let eig = SymmetricEigen::new(m.real_part());
        (eig.eigenvalues, eig.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let eig = SymmetricEigen::new(m.matrix().clone());
        (eig.eigenvalues, eig.eigenvectors)
    };
    let mut pairs: Vec<EigenPair> = (0..m.dim())
        .map(|k| {
            let value = values[k];
            let v: DVector<Complex64> = vectors.column(k).into_owned();
            let residual = (m.matrix() * &v - &v * Complex64::new(value, 0.0)).norm();
            EigenPair {
                value,
                vector: SignalVector::new(v, m.basis()),
                residual,
            }
        })
        .collect();
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(Spectrum { pairs })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularTriplet {
    pub sigma: f64,
    pub left: SignalVector,
    pub right: SignalVector,
}

/// Singular triplets sorted by descending `sigma`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SingularTriplets {
    pub triplets: Vec<SingularTriplet>,
}

impl SingularTriplets {
    pub fn sigmas(&self) -> Vec<f64> {
        self.triplets.iter().map(|t| t.sigma).collect()
    }

    pub fn max_sigma(&self) -> f64 {
        self.triplets.first().map_or(0.0, |t| t.sigma)
    }
}

/// SVD of `E = pi_2 pi_1`.
pub fn svd_e(p: &ModelParams) -> SingularTriplets {
    let e = limiting_map(p);
    if e.dim() == 0 {
        return SingularTriplets::default();
    }
    // E is real, so a real SVD suffices
    let (u, sigma, v) = jacobi_svd(&e.real_part());
    let basis = p.position_kind();
    let mut triplets: Vec<SingularTriplet> = (0..sigma.len())
        .map(|k| SingularTriplet {
            sigma: sigma[k],
            left: SignalVector::from_real(u.column(k).as_slice(), basis),
            right: SignalVector::from_real(v.column(k).as_slice(), basis),
        })
        .collect();
    triplets.sort_by(|a, b| b.sigma.total_cmp(&a.sigma));
    SingularTriplets { triplets }
}

/// One-sided (Hestenes) Jacobi SVD of a square real matrix: `a = u diag(sigma) v^T`.
///
/// Columns are orthogonalized pairwise until every pair is orthogonal to
/// working precision, which gives small singular values to high relative
/// accuracy. Left vectors of zero singular values are completed by
/// Gram-Schmidt against the unit vectors.
fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = w.column(i).norm_squared();
                let beta = w.column(j).norm_squared();
                let gamma = w.column(i).dot(&w.column(j));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for r in 0..m.nrows() {
                        let (x, y) = (m[(r, i)], m[(r, j)]);
                        m[(r, i)] = c * x - s * y;
                        m[(r, j)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|k| w.column(k).norm()).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sigma: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let v = DMatrix::from_columns(&order.iter().map(|&k| v.column(k).into_owned()).collect::<Vec<_>>());

    let floor = sigma.first().copied().unwrap_or(0.0) * f64::EPSILON * n as f64;
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    for (slot, &k) in order.iter().enumerate() {
        if sigma[slot] > floor {
            cols.push(w.column(k) / sigma[slot]);
        }
    }
    let mut unit = 0;
    while cols.len() < n {
        let mut e = DVector::<f64>::zeros(n);
        e[unit] = 1.0;
        unit += 1;
        for _ in 0..2 {
            for c in &cols {
                let d = c.dot(&e);
                e -= c * d;
            }
        }
        let len = e.norm();
        if len > 1e-8 {
            cols.push(e / len);
        }
    }
    (DMatrix::from_columns(&cols), sigma, v)
}

/// A common eigenvector of `T` and `Q` inside the range of the time projector.
#[derive(Clone, Debug, PartialEq)]
pub struct JointMode {
    pub t: f64,
    pub q: f64,
    pub vector: SignalVector,
    /// `max(||Tv - tv||, ||Qv - qv||)`
    pub residual: f64,
}

/// Diagonalizes the leading block of `T` (the labels `j <= L`, decoupled
/// exactly from the rest) and reads off `q = <v|Q|v>` for each eigenvector.
/// Modes are returned by descending `q`.
pub fn joint_spectrum(p: &ModelParams) -> Result<Vec<JointMode>> {
    let t = heun_tb(p);
    let q = tb_operator(p);
    let size = p.time_rank();
    let block = t.leading_block(size);
    let spectrum = eig_sym_tridiag(&block)?;
    let d = p.dim();
    let basis = p.position_kind();

    let mut values = Vec::with_capacity(size);
    let mut vectors = Vec::with_capacity(size);
    for pair in &spectrum.pairs {
        let mut v = DVector::<Complex64>::zeros(d);
        v.rows_mut(0, size).copy_from(&pair.vector.coeffs);
        values.push(pair.value);
        vectors.push(v);
    }

    // Groups of (numerically) equal t can only arise across exactly decoupled
    // sub-blocks; rotate inside each group so Q is diagonal there too.
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] < DEGENERACY_GAP {
            end += 1;
        }
        if end - start > 1 {
            rotate_group(&mut vectors[start..end], q.matrix())?;
        }
        start = end;
    }

    let t_dense = t.to_dense();
    let mut modes: Vec<JointMode> = values
        .iter()
        .zip(vectors)
        .map(|(&tv, v)| {
            let qv = q.matrix() * &v;
            let qval = v.dotc(&qv).re;
            let q_res = (&qv - &v * Complex64::new(qval, 0.0)).norm();
            let t_res = (t_dense.matrix() * &v - &v * Complex64::new(tv, 0.0)).norm();
            JointMode {
                t: tv,
                q: qval,
                vector: SignalVector::new(v, basis),
                residual: q_res.max(t_res),
            }
        })
        .collect();
    modes.sort_by(|a, b| b.q.total_cmp(&a.q).then(a.t.total_cmp(&b.t)));
    if let Some(bad) = modes.iter().find(|m| m.residual > JOINT_RESIDUAL_TOL) {
        log::warn!(
            "joint eigenvector residual {:e} at t = {} exceeds {:e}",
            bad.residual,
            bad.t,
            JOINT_RESIDUAL_TOL
        );
    }
    Ok(modes)
}

fn rotate_group(vectors: &mut [DVector<Complex64>], q: &DMatrix<Complex64>) -> Result<()> {
    let k = vectors.len();
    let basis = DMatrix::from_columns(vectors);
    let reduced = basis.adjoint() * q * &basis;
    let reduced = DenseOperator::hermitian(reduced, crate::core_model::BasisKind::PositionPlus)?;
    let eig = eig_sym_dense(&reduced)?;
    for (slot, pair) in vectors.iter_mut().zip(eig.pairs.iter()).take(k) {
        *slot = &basis * &pair.vector.coeffs;
    }
    Ok(())
}
