//! Recovering a time-limited signal from its low-frequency Fourier data.
//!
//! Each parity sector is handled on its own: the data are the first
//! `band_rank` momentum coordinates of `pi_1 f`, and the estimate is the
//! truncated pseudo-inverse of `E = pi_2 pi_1` applied to them.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::core_model::{check_same_basis, fourier_matrix, ModelParams, Parity, SignalVector};
use crate::error::{Error, Result};
use crate::operators::{tb_operator, SUPPORT_TOL};
use crate::spectral::{eig_sym_dense, svd_e};

/// Default truncation threshold relative to the largest singular value.
pub const DEFAULT_RELATIVE_ZERO_TOL: f64 = 1e-10;

/// `sigma_max / sigma_min` above which a full-rank problem is reported as
/// ill-conditioned: beyond it the round-off amplification exceeds 1e-10.
pub const ILL_CONDITIONED_RATIO: f64 = 1e6;

/// Known Fourier coefficients `f_k` for the kept momenta of one sector.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedData {
    pub coeffs: DVector<Complex64>,
    pub params: ModelParams,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Every mode of the time window is seen with a usable singular value.
    Exact,
    /// Every mode is seen, but the smallest singular value is tiny.
    IllConditioned,
    /// Some time-limited signal is invisible in the data.
    Unrecoverable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionReport {
    pub f_hat: SignalVector,
    /// Singular values of `E` over the time window, descending.
    pub singular_values: Vec<f64>,
    pub kept_modes: usize,
    pub discarded_modes: usize,
    pub verdict: Verdict,
    /// Smallest singular value used by the pseudo-inverse (0 if none).
    pub worst_kept_sigma: f64,
}

impl ReconstructionReport {
    /// `sigma_max / sigma_min` over the kept modes.
    pub fn condition(&self) -> f64 {
        match self.singular_values.first() {
            Some(&max) if self.worst_kept_sigma > 0.0 => max / self.worst_kept_sigma,
            _ => f64::INFINITY,
        }
    }
}

/// Fourier data of a time-limited `f` (position coordinates of one sector).
pub fn forward_observe(f: &SignalVector, p: &ModelParams) -> Result<ObservedData> {
    check_same_basis(f.basis, p.position_kind())?;
    if f.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            left: f.len(),
            right: p.dim(),
        });
    }
    let off_window = f.coeffs.rows(p.time_rank(), p.dim() - p.time_rank()).norm();
    if off_window > SUPPORT_TOL * f.norm().max(1.0) {
        return Err(Error::Domain(format!(
            "signal is not time-limited (off-window mass {off_window:e})"
        )));
    }
    let four = fourier_matrix(p);
    let kept = four.matrix().rows(0, p.band_rank());
    Ok(ObservedData {
        coeffs: kept * &f.coeffs,
        params: *p,
    })
}

/// Truncated pseudo-inverse of `E` applied to the data. `zero_tol` defaults
/// to `1e-10 sigma_max`; singular values at or below it are discarded.
pub fn reconstruct(d: &ObservedData, zero_tol: Option<f64>) -> Result<ReconstructionReport> {
    let p = &d.params;
    if d.coeffs.len() != p.band_rank() {
        return Err(Error::DimensionMismatch {
            left: d.coeffs.len(),
            right: p.band_rank(),
        });
    }
    // the data as a vector of the sector: pi_2 pi_1 f in position coordinates
    let four = fourier_matrix(p);
    let y = four.matrix().rows(0, p.band_rank()).adjoint() * &d.coeffs;

    let svd = svd_e(p);
    let window = p.time_rank();
    let sigmas: Vec<f64> = svd.triplets.iter().take(window).map(|t| t.sigma).collect();
    let sigma_max = sigmas.first().copied().unwrap_or(0.0);
    let tol = zero_tol.unwrap_or(DEFAULT_RELATIVE_ZERO_TOL * sigma_max);

    let mut f_hat = DVector::<Complex64>::zeros(p.dim());
    let mut kept = 0;
    let mut worst = 0.0;
    for t in svd.triplets.iter().take(window) {
        if t.sigma > tol {
            let weight = t.left.coeffs.dotc(&y) / t.sigma;
            f_hat += &t.right.coeffs * weight;
            kept += 1;
            worst = t.sigma;
        }
    }
    let verdict = if kept < window {
        Verdict::Unrecoverable
    } else if sigma_max / worst > ILL_CONDITIONED_RATIO {
        Verdict::IllConditioned
    } else {
        Verdict::Exact
    };
    Ok(ReconstructionReport {
        f_hat: SignalVector::new(f_hat, p.position_kind()),
        singular_values: sigmas,
        kept_modes: kept,
        discarded_modes: window - kept,
        verdict,
        worst_kept_sigma: worst,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditioningReport {
    /// Eigenvalues of `Q` over the time window, ascending.
    pub eigenvalues: Vec<f64>,
    /// How many of them are at or below the threshold.
    pub near_zero_count: usize,
    pub threshold: f64,
}

/// Spectrum of `Q` on the time window. `zero_tol` defaults to
/// `1e-10 q_max`. Since `q = sigma^2`, the count equals the number of
/// window modes lost by `E` unless a singular value falls in `(tol, sqrt(tol)]`.
pub fn conditioning_report(p: &ModelParams, zero_tol: Option<f64>) -> Result<ConditioningReport> {
    let q = tb_operator(p);
    let w = p.time_rank();
    let block = q.matrix().view((0, 0), (w, w)).into_owned();
    let block = crate::operators::DenseOperator::hermitian(block, p.position_kind())?;
    let eigenvalues = eig_sym_dense(&block)?.values();
    let q_max = eigenvalues.last().copied().unwrap_or(0.0);
    let threshold = zero_tol.unwrap_or(DEFAULT_RELATIVE_ZERO_TOL * q_max);
    let near_zero_count = eigenvalues.iter().filter(|&&x| x <= threshold).count();
    Ok(ConditioningReport {
        eigenvalues,
        near_zero_count,
        threshold,
    })
}

/// Both sector reconstructions of a full signal on `Z/2nZ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullReconstruction {
    /// The estimate as values on `Z/2nZ`.
    pub f_hat: DVector<Complex64>,
    pub plus: ReconstructionReport,
    pub minus: ReconstructionReport,
}

impl FullReconstruction {
    /// The worse of the two sector verdicts.
    pub fn verdict(&self) -> Verdict {
        let rank = |v: Verdict| match v {
            Verdict::Exact => 0,
            Verdict::IllConditioned => 1,
            Verdict::Unrecoverable => 2,
        };
        if rank(self.plus.verdict) >= rank(self.minus.verdict) {
            self.plus.verdict
        } else {
            self.minus.verdict
        }
    }
}

/// Fourier data of both sectors of an ambient signal.
pub fn observe_full(f: &DVector<Complex64>, p: &ModelParams) -> Result<(ObservedData, ObservedData)> {
    let mut out = Vec::with_capacity(2);
    for parity in [Parity::Plus, Parity::Minus] {
        let q = p.with_parity(parity)?;
        out.push(forward_observe(&SignalVector::from_ambient(f, &q)?, &q)?);
    }
    let minus = out.pop().expect("two sectors");
    let plus = out.pop().expect("two sectors");
    Ok((plus, minus))
}

/// Splits `f` into parity sectors, observes and reconstructs each, and
/// merges the estimates. The parity of `p` is ignored.
pub fn reconstruct_full(f: &DVector<Complex64>, p: &ModelParams, zero_tol: Option<f64>) -> Result<FullReconstruction> {
    let (plus_data, minus_data) = observe_full(f, p)?;
    let (plus, minus) = rayon::join(
        || reconstruct(&plus_data, zero_tol),
        || reconstruct(&minus_data, zero_tol),
    );
    let (plus, minus) = (plus?, minus?);
    let f_hat = plus.f_hat.to_ambient(&plus_data.params)? + minus.f_hat.to_ambient(&minus_data.params)?;
    Ok(FullReconstruction { f_hat, plus, minus })
}
