//! Randomized checks of the structural identities, one per invariant.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use tblim::bethe::{
    bethe_state, check_off_shell_action, eigenvalue_samples, solve_bethe, AnsatzVariant, SolverConfig,
};
use tblim::core_model::{fourier_matrix, momentum_basis, position_basis, ModelParams, Parity, SignalVector};
use tblim::operators::{commutation_residuals, heun_tb, tb_operator};
use tblim::polymap::{eval_p_at_eigenvalue, recurrence_at_eigenvalue, recurrence_polys};
use tblim::recon::{conditioning_report, forward_observe, reconstruct, Verdict};
use tblim::spectral::{eig_sym_dense, joint_spectrum, svd_e, tridiag_eigenvalues};

type C = Complex64;

fn parity() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Plus), Just(Parity::Minus)]
}

/// Any admissible parameter set with `2 <= n <= max_n`.
fn params(max_n: usize) -> impl Strategy<Value = ModelParams> {
    (2..=max_n, parity())
        .prop_flat_map(|(n, parity)| (Just(n), 0..=n, 0..=n, Just(parity)))
        .prop_map(|(n, k, l, parity)| ModelParams::new(n, k, l, parity).unwrap())
}

/// Parameters whose time window has a polynomial link (no degenerate step).
fn linked_params(max_n: usize) -> impl Strategy<Value = ModelParams> {
    params(max_n).prop_filter("plus sector with L = n has no recurrence", |p| {
        !(p.parity() == Parity::Plus && p.time_limit() == p.n()) && p.time_rank() > 0
    })
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<C>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C::new(a, b)), len)
}

fn grid_point(n: usize) -> impl Strategy<Value = C> {
    (0.1..n as f64 - 0.1, -0.5..0.5f64).prop_map(|(a, b)| C::new(a, b))
}

fn amax(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_vectors_have_sector_parity(p in params(40)) {
        let two_n = p.ambient_dim();
        let sign = p.parity().sign();
        for v in position_basis(&p).iter().chain(momentum_basis(&p).iter()) {
            for j in 0..two_n {
                prop_assert!((v[j] - sign * v[(two_n - j) % two_n]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bases_are_orthonormal(n in 2usize..=256, parity in parity()) {
        let p = ModelParams::new(n, 0, 0, parity).unwrap();
        for basis in [position_basis(&p), momentum_basis(&p)] {
            let m = DMatrix::from_columns(&basis);
            let gram = m.transpose() * &m;
            prop_assert!(amax(&(gram - DMatrix::identity(p.dim(), p.dim()))) < 1e-13);
        }
    }

    #[test]
    fn fourier_matrix_is_the_basis_overlap(p in params(64)) {
        let pos = DMatrix::from_columns(&position_basis(&p));
        let mom = DMatrix::from_columns(&momentum_basis(&p));
        let brute = mom.transpose() * pos;
        prop_assert!(amax(&(fourier_matrix(&p).real_part() - brute)) < 1e-13);
    }

    #[test]
    fn grid_sine_and_cosine_are_pythagorean(
        p in params(64),
        re in -300.0..300.0f64,
        im in -20.0..20.0f64,
    ) {
        let x = C::new(re, im);
        let (s, c) = (p.trig_s(x), p.trig_c(x));
        let scale = s.norm_sqr() + c.norm_sqr();
        prop_assert!((s * s + c * c - 1.0).norm() <= 4.0 * f64::EPSILON * scale);
    }

    #[test]
    fn grid_trig_has_period_4n(p in params(64), re in -50.0..50.0f64, im in -2.0..2.0f64) {
        let x = C::new(re, im);
        let shift = C::new(4.0 * p.n() as f64, 0.0);
        prop_assert!((p.trig_s(x + shift) - p.trig_s(x)).norm() < 1e-12 * (1.0 + p.trig_s(x).norm()));
        prop_assert!((p.trig_c(x + shift) - p.trig_c(x)).norm() < 1e-12 * (1.0 + p.trig_c(x).norm()));
    }

    #[test]
    fn heun_operator_commutes_with_the_limiters(p in params(64)) {
        prop_assert!(commutation_residuals(&p).max() < 1e-12);
    }

    #[test]
    fn q_spectrum_lies_in_unit_interval(p in params(48)) {
        let values = eig_sym_dense(&tb_operator(&p)).unwrap().values();
        prop_assert!(values.iter().all(|&q| (-1e-12..=1.0 + 1e-12).contains(&q)));
        let rank = values.iter().filter(|&&q| q > 1e-10).count();
        prop_assert!(rank <= p.time_rank().min(p.band_rank()));
    }

    #[test]
    fn heun_blocks_decouple_exactly(p in params(64)) {
        let t = heun_tb(&p);
        let w = p.time_rank();
        if w > 0 && w < p.dim() {
            prop_assert_eq!(t.offdiag[w - 1], 0.0);
        }
        let dense = t.to_dense();
        for i in 0..w {
            for j in w..p.dim() {
                prop_assert_eq!(dense.matrix()[(i, j)], C::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn tridiagonal_solver_matches_dense(p in params(64)) {
        let t = heun_tb(&p);
        let mut dense: Vec<f64> = t.to_dense().real_part().symmetric_eigenvalues().iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        let ours = tridiag_eigenvalues(&t).unwrap();
        for (a, b) in ours.iter().zip(&dense) {
            prop_assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn joint_modes_are_window_eigenvectors(p in linked_params(40)) {
        let t = heun_tb(&p).to_dense();
        let q = tb_operator(&p);
        let w = p.time_rank();
        let modes = joint_spectrum(&p).unwrap();
        prop_assert_eq!(modes.len(), w);
        for m in &modes {
            let v = &m.vector.coeffs;
            prop_assert!(v.rows(w, p.dim() - w).iter().all(|z| *z == C::new(0.0, 0.0)));
            prop_assert!((t.matrix() * v - v * C::new(m.t, 0.0)).norm() < 1e-10);
            prop_assert!((q.matrix() * v - v * C::new(m.q, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn top_concentration_is_largest_singular_value_squared(p in params(48)) {
        let values = eig_sym_dense(&tb_operator(&p)).unwrap().values();
        let q_max = values.last().copied().unwrap_or(0.0);
        let s = svd_e(&p).max_sigma();
        prop_assert!((q_max - s * s).abs() < 1e-10);
    }

    #[test]
    fn recurrence_gives_eigenvector_ratios(p in linked_params(16)) {
        for mode in joint_spectrum(&p).unwrap() {
            let v = &mode.vector.coeffs;
            prop_assume!(v[0].norm() > 1e-3);
            let r = recurrence_at_eigenvalue(&p, mode.t).unwrap();
            for (j, rj) in r.iter().enumerate() {
                prop_assert!((rj - v[j].re / v[0].re).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn link_polynomial_interpolates_concentrations(p in linked_params(32)) {
        for mode in joint_spectrum(&p).unwrap() {
            prop_assert!((eval_p_at_eigenvalue(&p, mode.t).unwrap() - mode.q).abs() < 1e-8);
        }
    }

    #[test]
    fn recurrence_polynomials_have_full_degree(p in linked_params(24)) {
        for (j, poly) in recurrence_polys(&p).unwrap().iter().enumerate() {
            prop_assert_eq!(poly.degree(), j);
            prop_assert!(poly.leading() != 0.0);
        }
    }
}

/// Minus-sector parameters with `2 <= L <= n - 1`, where the first ansatz
/// has at least one root.
fn first_ansatz_params(max_n: usize) -> impl Strategy<Value = ModelParams> {
    (4..=max_n)
        .prop_flat_map(|n| (Just(n), 0..=n, 2..n))
        .prop_map(|(n, k, l)| ModelParams::new(n, k, l, Parity::Minus).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bethe_state_ignores_root_order(
        (p, roots, perm) in first_ansatz_params(10).prop_flat_map(|p| {
            let count = AnsatzVariant::MinusFirst.root_count(&p);
            let n = p.n();
            (Just(p), prop::collection::vec(grid_point(n), count), Just((0..count).collect::<Vec<_>>()).prop_shuffle())
        })
    ) {
        let Ok(a) = bethe_state(&p, AnsatzVariant::MinusFirst, &roots) else { return Ok(()) };
        let shuffled: Vec<C> = perm.iter().map(|&i| roots[i]).collect();
        let b = bethe_state(&p, AnsatzVariant::MinusFirst, &shuffled).unwrap();
        prop_assert!((&a.coeffs - &b.coeffs).norm() <= 1e-10 * a.norm().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn bethe_state_stays_in_time_window(
        (p, variant, roots) in params(10).prop_flat_map(|p| {
            let variants: Vec<AnsatzVariant> = [AnsatzVariant::MinusFirst, AnsatzVariant::MinusSecond, AnsatzVariant::Plus]
                .into_iter()
                .filter(|v| v.check_admissible(&p).is_ok())
                .collect();
            let n = p.n();
            (Just(p), prop::sample::select(if variants.is_empty() { vec![AnsatzVariant::Plus] } else { variants }))
                .prop_flat_map(move |(p, v)| {
                    let count = if v.check_admissible(&p).is_ok() { v.root_count(&p) } else { 0 };
                    (Just(p), Just(v), prop::collection::vec(grid_point(n), count))
                })
        })
    ) {
        prop_assume!(variant.check_admissible(&p).is_ok());
        let Ok(state) = bethe_state(&p, variant, &roots) else { return Ok(()) };
        let w = p.time_rank();
        let outside = state.coeffs.rows(w, p.dim() - w).norm();
        prop_assert!(outside <= 1e-11 * state.norm().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn off_shell_action_holds_for_arbitrary_roots(
        (p, roots, u) in first_ansatz_params(12).prop_flat_map(|p| {
            let count = AnsatzVariant::MinusFirst.root_count(&p);
            let n = p.n();
            (Just(p), prop::collection::vec(grid_point(n), count), grid_point(n))
        })
    ) {
        if let Ok(r) = check_off_shell_action(&p, &roots, u) {
            prop_assert!(r < 1e-9, "relative residual {r:e}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bethe_eigenvalues_do_not_depend_on_u(p in first_ansatz_params(8), second in any::<bool>()) {
        let variant = if second { AnsatzVariant::MinusSecond } else { AnsatzVariant::MinusFirst };
        prop_assume!(variant.check_admissible(&p).is_ok());
        let report = solve_bethe(&p, variant, &SolverConfig::for_params(&p)).unwrap();
        for set in &report.sets {
            let samples = eigenvalue_samples(&p, variant, &set.roots).unwrap();
            prop_assert!(samples.len() >= 7);
            for z in &samples {
                prop_assert!((z - samples[0]).norm() < 1e-8);
                prop_assert!(z.im.abs() < 1e-8);
            }
        }
    }
}

/// Parameters with a time-limited random signal in position coordinates.
fn signal(max_n: usize) -> impl Strategy<Value = (ModelParams, SignalVector)> {
    params(max_n).prop_flat_map(|p| {
        let w = p.time_rank();
        (Just(p), complex_vec(w)).prop_map(move |(p, head)| {
            let mut v = DVector::zeros(p.dim());
            v.rows_mut(0, w).copy_from(&DVector::from_vec(head));
            let f = SignalVector::new(v, p.position_kind());
            (p, f)
        })
    })
}

/// Smallest singular value of `E` over the time window (zero when some
/// window mode is lost entirely).
fn sigma_min(p: &ModelParams) -> f64 {
    let s = svd_e(p).sigmas();
    let w = p.time_rank();
    if w == 0 {
        return f64::INFINITY;
    }
    s.get(w - 1).copied().unwrap_or(0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_reconstruction_round_trips((p, f) in signal(16)) {
        let report = reconstruct(&forward_observe(&f, &p).unwrap(), None).unwrap();
        if report.verdict == Verdict::Exact {
            let err = (&report.f_hat.coeffs - &f.coeffs).norm();
            prop_assert!(err <= 1e-8 / report.worst_kept_sigma.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn near_zero_count_matches_rank_deficit(p in params(24)) {
        let report = conditioning_report(&p, None).unwrap();
        let sigma_cut = report.threshold.sqrt();
        let rank = svd_e(&p).sigmas().iter().filter(|&&s| s > sigma_cut).count();
        prop_assert_eq!(report.near_zero_count, p.time_rank() - rank.min(p.time_rank()));
    }

    #[test]
    fn wider_band_never_hurts(p in params(24)) {
        prop_assume!(p.band_limit() < p.n());
        let wider = ModelParams::new(p.n(), p.band_limit() + 1, p.time_limit(), p.parity()).unwrap();
        prop_assert!(sigma_min(&wider) >= sigma_min(&p) - 1e-12);
    }
}
