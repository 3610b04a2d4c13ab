//! The invariant suite behind `tblim verify`.

use anyhow::{Context, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tblim::bethe::{
    check_dynamical_relations, check_off_shell_action, check_reduction_formula, check_t_decomposition,
    check_vacuum_action, AnsatzVariant,
};
use tblim::core_model::{ModelParams, Parity};
use tblim::error::Error;
use tblim::operators::{
    check_askey_wilson, heun_tb, leonard_duality_residuals, max_modulus, DenseOperator,
};
use tblim::polymap::{eigenbasis_residual, verify_q_equals_pi_p, OPERATOR_IDENTITY_TOL};
use tblim::spectral::{eig_sym_dense, eig_sym_tridiag};

use crate::build::Operators;
use crate::output::{num, Table};

pub const STRUCTURAL_TOL: f64 = 1e-12;
pub const EIGENBASIS_TOL: f64 = 1e-8;
pub const ORACLE_TOL: f64 = 1e-11;
pub const SAMPLED_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

impl Status {
    fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotApplicable => "n/a",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tol: f64,
    pub samples: usize,
    /// Sample points rejected because a denominator vanished there.
    pub skipped: usize,
    pub status: Status,
    pub note: Option<String>,
}

impl Check {
    fn measured(name: &'static str, residual: f64, tol: f64) -> Self {
        Check {
            name,
            residual,
            tol,
            samples: 1,
            skipped: 0,
            status: if residual < tol { Status::Pass } else { Status::Fail },
            note: None,
        }
    }

    fn not_applicable(name: &'static str, tol: f64, note: String) -> Self {
        Check {
            name,
            residual: 0.0,
            tol,
            samples: 0,
            skipped: 0,
            status: Status::NotApplicable,
            note: Some(note),
        }
    }

    fn failed(name: &'static str, tol: f64, note: String) -> Self {
        Check {
            name,
            residual: f64::INFINITY,
            tol,
            samples: 0,
            skipped: 0,
            status: Status::Fail,
            note: Some(note),
        }
    }
}

pub struct Suite {
    pub checks: Vec<Check>,
}

impl Suite {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "residual": num(c.residual),
                    "tol": num(c.tol),
                    "samples": c.samples,
                    "skipped": c.skipped,
                    "status": c.status.name(),
                    "note": c.note,
                })
            })
            .collect();
        json!({ "checks": checks, "all_pass": self.all_pass() })
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["check", "residual", "tol", "samples", "skipped", "status"]);
        for c in &self.checks {
            t.push(vec![
                c.name.to_string(),
                crate::output::cell(c.residual),
                crate::output::cell(c.tol),
                c.samples.to_string(),
                c.skipped.to_string(),
                c.status.name().to_string(),
            ]);
        }
        t
    }
}

/// Runs a sampled identity until `count` points avoided every pole.
fn sampled<F>(name: &'static str, count: usize, tol: f64, mut eval: F) -> Check
where
    F: FnMut() -> tblim::error::Result<f64>,
{
    let mut worst = 0.0f64;
    let mut done = 0;
    let mut skipped = 0;
    while done < count && skipped < 10 * count.max(1) {
        match eval() {
            Ok(r) => {
                worst = worst.max(if r.is_nan() { f64::INFINITY } else { r });
                done += 1;
            }
            Err(Error::Pole { .. }) => skipped += 1,
            Err(e) => return Check::failed(name, tol, e.to_string()),
        }
    }
    if done == 0 && skipped > 0 {
        // the identity involves a level with s(2m) = 0 for every sample
        return Check::not_applicable(name, tol, format!("all {skipped} sample points hit a pole"));
    }
    Check {
        name,
        residual: worst,
        tol,
        samples: done,
        skipped,
        status: if done == count && worst < tol { Status::Pass } else { Status::Fail },
        note: (done < count).then(|| format!("only {done} of {count} points avoided the poles")),
    }
}

fn commutator_norm(a: &DenseOperator, b: &DenseOperator) -> Result<f64> {
    Ok(a.commutator(b).context("operators are in different bases")?.max_abs())
}

/// Runs every check for `p`. `ops` are the matrices to test directly;
/// `loaded` says they came from a file rather than a fresh build.
pub fn run_suite(p: &ModelParams, ops: &Operators, loaded: bool, samples: usize, seed: u64) -> Result<Suite> {
    let mut checks = Vec::new();

    if loaded {
        let fresh = Operators::build(p)?;
        let diff = ops.max_difference(&fresh)?;
        checks.push(Check::measured("operators_match_build", diff, STRUCTURAL_TOL));
    }
    checks.push(Check::measured("commutator_t_pi1", commutator_norm(&ops.t, &ops.pi1)?, STRUCTURAL_TOL));
    checks.push(Check::measured("commutator_t_pi2", commutator_norm(&ops.t, &ops.pi2)?, STRUCTURAL_TOL));
    checks.push(Check::measured("commutator_t_q", commutator_norm(&ops.t, &ops.q)?, STRUCTURAL_TOL));

    let (aw1, aw2) = check_askey_wilson(p);
    checks.push(Check::measured("askey_wilson", aw1, STRUCTURAL_TOL));
    checks.push(Check::measured("askey_wilson_dual", aw2, STRUCTURAL_TOL));
    let (d1, d2) = leonard_duality_residuals(p);
    checks.push(Check::measured("leonard_duality", d1.max(d2), STRUCTURAL_TOL));

    let tri = heun_tb(p);
    match (eig_sym_tridiag(&tri), eig_sym_dense(&tri.to_dense())) {
        (Ok(a), Ok(b)) => {
            let gap = a
                .values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            checks.push(Check::measured("tridiagonal_oracle", gap, ORACLE_TOL));
        }
        (Err(e), _) | (_, Err(e)) => checks.push(Check::failed("tridiagonal_oracle", ORACLE_TOL, e.to_string())),
    }

    match verify_q_equals_pi_p(p) {
        Ok(r) => checks.push(Check::measured("q_equals_pi_p", r, OPERATOR_IDENTITY_TOL)),
        Err(e @ Error::DegenerateRecurrence { .. }) => {
            checks.push(Check::not_applicable("q_equals_pi_p", OPERATOR_IDENTITY_TOL, e.to_string()))
        }
        Err(e) => checks.push(Check::failed("q_equals_pi_p", OPERATOR_IDENTITY_TOL, e.to_string())),
    }
    checks.push(eigenbasis_check(p)?);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.n() as f64;
    let span = 2 * p.n() as i64;
    let point = move |rng: &mut ChaCha8Rng| Complex64::new(rng.random_range(0.1..n - 0.1), rng.random_range(-0.5..0.5));

    checks.push(sampled("exchange_bb", samples, SAMPLED_TOL, || {
        let (u, v, m) = (point(&mut rng), point(&mut rng), rng.random_range(-span..=span));
        check_dynamical_relations(p, u, v, m).map(|r| r.0)
    }));
    checks.push(sampled("exchange_db", samples, SAMPLED_TOL, || {
        let (u, v, m) = (point(&mut rng), point(&mut rng), rng.random_range(-span..=span));
        check_dynamical_relations(p, u, v, m).map(|r| r.1)
    }));
    checks.push(sampled("t_decomposition", samples, SAMPLED_TOL, || {
        check_t_decomposition(p, point(&mut rng)).map(|(a, b)| a.max(b))
    }));
    checks.push(sampled("vacuum_action", samples, SAMPLED_TOL, || {
        let (u, m) = (point(&mut rng), rng.random_range(-span..=span));
        check_vacuum_action(p, u, m)
    }));

    if AnsatzVariant::MinusFirst.check_admissible(p).is_ok() {
        let roots = AnsatzVariant::MinusFirst.root_count(p);
        checks.push(sampled("off_shell_action", samples, SAMPLED_TOL, || {
            let xs: Vec<Complex64> = (0..roots).map(|_| point(&mut rng)).collect();
            check_off_shell_action(p, &xs, point(&mut rng))
        }));
    } else {
        checks.push(Check::not_applicable(
            "off_shell_action",
            SAMPLED_TOL,
            "needs the minus sector with 1 <= L <= n-1".into(),
        ));
    }
    if p.parity() == Parity::Minus && p.time_limit() >= 1 && p.time_limit() < p.n() {
        let l = p.time_limit();
        checks.push(sampled("reduction_formula", samples, SAMPLED_TOL, || {
            let ys: Vec<Complex64> = (0..l).map(|_| point(&mut rng)).collect();
            check_reduction_formula(p, &ys, true)
        }));
    } else {
        checks.push(Check::not_applicable(
            "reduction_formula",
            SAMPLED_TOL,
            "needs the minus sector with 1 <= L <= n-1".into(),
        ));
    }
    Ok(Suite { checks })
}

/// `|P(t) - q|` over the joint modes.
fn eigenbasis_check(p: &ModelParams) -> Result<Check> {
    let name = "p_of_t_matches_q";
    Ok(match eigenbasis_residual(p) {
        Ok(r) => {
            let mut c = Check::measured(name, r, EIGENBASIS_TOL);
            c.samples = p.time_rank();
            c
        }
        Err(e @ Error::DegenerateRecurrence { .. }) => Check::not_applicable(name, EIGENBASIS_TOL, e.to_string()),
        Err(e) => Check::failed(name, EIGENBASIS_TOL, e.to_string()),
    })
}

/// Largest entry modulus of `a - b`, or infinity when the shapes differ.
pub fn matrix_gap(a: &DenseOperator, b: &DenseOperator) -> f64 {
    if a.basis() != b.basis() || a.matrix().shape() != b.matrix().shape() {
        return f64::INFINITY;
    }
    max_modulus(&(a.matrix() - b.matrix()))
}
