mod args;
mod build;
mod output;
mod verify;

use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};
use tblim::bethe::{solve_bethe, AnsatzVariant, SolverConfig};
use tblim::core_model::{ModelParams, Parity};
use tblim::error::Error;
use tblim::operators::tb_operator;
use tblim::recon::{reconstruct_full, ReconstructionReport};
use tblim::spectral::joint_spectrum;

use args::{AnsatzArg, Cli, Command, Common, Format, ParityArg};
use build::Operators;
use output::{cell, complex, complex_list, num, params_json, Table};

/// Exit status: 0 success, 1 a check or match failed, 2 bad input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Status {
    Ok = 0,
    Failed = 1,
    BadInput = 2,
}

/// What one run produces: a JSON document, the same data as a table, and
/// the exit status.
struct Outcome {
    json: Value,
    table: Table,
    status: Status,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TBLIM_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e) as u8)
        }
    }
}

/// Library errors about the request are input errors; numerical breakdowns
/// are failures. Anything else (I/O, parsing) is an input error.
fn classify(e: &anyhow::Error) -> Status {
    match e.downcast_ref::<Error>() {
        Some(Error::NoConvergence { .. } | Error::DegenerateSpectrum { .. } | Error::DegenerateRecurrence { .. }) => {
            Status::Failed
        }
        _ => Status::BadInput,
    }
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Build(c) | Command::Spectrum(c) => c,
        Command::Verify(v) => &v.common,
        Command::Bethe(b) => &b.common,
        Command::Reconstruct(r) => &r.common,
    }
}

fn run(cli: &Cli) -> Result<Status> {
    let c = common(&cli.command);
    let (json, table, status) = match &c.sweep {
        None => {
            let o = run_one(&cli.command, c)?;
            (o.json, o.table, o.status)
        }
        Some(spec) => sweep(&cli.command, c, spec)?,
    };
    let text = match c.format {
        Format::Json => output::to_json_text(&json)?,
        Format::Csv => table.to_csv()?,
    };
    output::write_output(c.out.as_deref(), &text)?;
    Ok(status)
}

fn run_one(cmd: &Command, c: &Common) -> Result<Outcome> {
    let mut o = match cmd {
        Command::Build(_) => cmd_build(c)?,
        Command::Spectrum(_) => cmd_spectrum(c)?,
        Command::Verify(v) => cmd_verify(c, v.operators.as_deref(), v.samples)?,
        Command::Bethe(b) => cmd_bethe(c, b.ansatz, b.max_starts)?,
        Command::Reconstruct(r) => cmd_reconstruct(c, &r.input)?,
    };
    let name = match cmd {
        Command::Build(_) => "build",
        Command::Spectrum(_) => "spectrum",
        Command::Verify(_) => "verify",
        Command::Bethe(_) => "bethe",
        Command::Reconstruct(_) => "reconstruct",
    };
    o.json["command"] = json!(name);
    Ok(o)
}

/// Parses `K=a..b,L=c..d` into the `(K, L)` grid it spans.
fn sweep_grid(spec: &str, c: &Common) -> Result<Vec<(usize, usize)>> {
    let mut ks = vec![c.k];
    let mut ls = vec![c.l];
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (axis, range) = part.split_once('=').with_context(|| format!("sweep term {part:?} has no '='"))?;
        let (lo, hi) = range.split_once("..").with_context(|| format!("sweep range {range:?} has no '..'"))?;
        let bound = |s: &str| -> Result<usize> {
            let s = s.trim();
            if s == "n" {
                Ok(c.n)
            } else {
                s.parse().with_context(|| format!("bad sweep bound {s:?}"))
            }
        };
        let values: Vec<usize> = (bound(lo)?..=bound(hi)?).collect();
        match axis.trim() {
            "K" => ks = values,
            "L" => ls = values,
            other => bail!("cannot sweep over {other:?}; use K or L"),
        }
    }
    Ok(ks.iter().flat_map(|&k| ls.iter().map(move |&l| (k, l))).collect())
}

/// Runs every grid point on the thread pool. Results keep grid order.
/// Inadmissible points are reported as skipped and do not affect the status.
fn sweep(cmd: &Command, c: &Common, spec: &str) -> Result<(Value, Table, Status)> {
    let grid = sweep_grid(spec, c)?;
    let results: Vec<(usize, usize, Result<Outcome>)> = grid
        .par_iter()
        .map(|&(k, l)| {
            let mut ck = c.clone();
            ck.k = k;
            ck.l = l;
            (k, l, run_one(cmd, &ck))
        })
        .collect();

    let mut runs = Vec::new();
    let mut table: Option<Table> = None;
    let mut status = Status::Ok;
    for (k, l, r) in results {
        match r {
            Ok(o) => {
                status = status.max(o.status);
                let t = table.get_or_insert_with(|| {
                    let mut h = vec!["n".to_string(), "K".to_string(), "L".to_string()];
                    h.extend(o.table.header.iter().cloned());
                    Table { header: h, rows: Vec::new() }
                });
                for row in o.table.rows {
                    let mut full = vec![c.n.to_string(), k.to_string(), l.to_string()];
                    full.extend(row);
                    t.push(full);
                }
                runs.push(o.json);
            }
            Err(e) => {
                let skipped = matches!(e.downcast_ref::<Error>(), Some(Error::Inadmissible(_)));
                if !skipped {
                    status = status.max(classify(&e));
                }
                runs.push(json!({
                    "params": { "n": c.n, "K": k, "L": l },
                    "error": format!("{e:#}"),
                    "skipped": skipped,
                }));
            }
        }
    }
    let json = json!({ "sweep": spec, "runs": runs });
    Ok((json, table.unwrap_or_default(), status))
}

fn parity_of(arg: ParityArg) -> Parity {
    match arg {
        ParityArg::Plus => Parity::Plus,
        ParityArg::Minus => Parity::Minus,
    }
}

fn params(c: &Common) -> Result<ModelParams> {
    let parity = c.parity.context("--parity is required for this command")?;
    Ok(ModelParams::new(c.n, c.k, c.l, parity_of(parity))?)
}

fn cmd_build(c: &Common) -> Result<Outcome> {
    let p = params(c)?;
    let ops = Operators::build(&p)?;
    Ok(Outcome {
        json: json!({ "params": params_json(&p), "operators": ops.to_json() }),
        table: ops.table(),
        status: Status::Ok,
    })
}

fn cmd_spectrum(c: &Common) -> Result<Outcome> {
    let p = params(c)?;
    let modes = joint_spectrum(&p)?;
    let trace_q = tb_operator(&p).matrix().trace().re;
    let mut table = Table::new(&["ell", "t", "q", "residual"]);
    let mut rows = Vec::new();
    for (ell, m) in modes.iter().enumerate() {
        table.push(vec![ell.to_string(), cell(m.t), cell(m.q), cell(m.residual)]);
        rows.push(json!({ "ell": ell, "t": num(m.t), "q": num(m.q), "residual": num(m.residual) }));
    }
    Ok(Outcome {
        json: json!({
            "params": params_json(&p),
            "modes": rows,
            "trace_q": num(trace_q),
            "sum_q": num(modes.iter().map(|m| m.q).sum()),
        }),
        table,
        status: Status::Ok,
    })
}

fn cmd_verify(c: &Common, operators: Option<&Path>, samples: usize) -> Result<Outcome> {
    let p = params(c)?;
    let (ops, loaded) = match operators {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            let file_params = &v["params"];
            if *file_params != params_json(&p) {
                bail!("operator file was built for {file_params}, not {}", params_json(&p));
            }
            (Operators::from_json(&v["operators"])?, true)
        }
        None => (Operators::build(&p)?, false),
    };
    let suite = verify::run_suite(&p, &ops, loaded, samples, c.seed)?;
    for ch in suite.checks.iter().filter(|ch| ch.status == verify::Status::Fail) {
        log::warn!("{} failed: residual {:e} (tol {:e})", ch.name, ch.residual, ch.tol);
    }
    let mut json = suite.to_json();
    json["params"] = params_json(&p);
    Ok(Outcome {
        json,
        table: suite.table(),
        status: if suite.all_pass() { Status::Ok } else { Status::Failed },
    })
}

fn cmd_bethe(c: &Common, ansatz: Option<AnsatzArg>, max_starts: Option<usize>) -> Result<Outcome> {
    let variant = match (ansatz, c.parity) {
        (Some(AnsatzArg::First), _) => AnsatzVariant::MinusFirst,
        (Some(AnsatzArg::Second), _) => AnsatzVariant::MinusSecond,
        (Some(AnsatzArg::Plus), _) => AnsatzVariant::Plus,
        (None, Some(ParityArg::Minus)) => AnsatzVariant::MinusFirst,
        (None, Some(ParityArg::Plus)) => AnsatzVariant::Plus,
        (None, None) => bail!("give --ansatz or --parity"),
    };
    if let Some(par) = c.parity {
        if parity_of(par) != variant.parity() {
            bail!("ansatz {variant} lives in the {} sector, not {}", variant.parity(), parity_of(par));
        }
    }
    let p = ModelParams::new(c.n, c.k, c.l, variant.parity())?;
    let mut config = SolverConfig::for_params(&p);
    config.rng_seed = c.seed;
    if let Some(tol) = c.tol {
        config.match_tol = tol;
    }
    if let Some(s) = max_starts {
        config.max_starts = s;
    }
    let report = solve_bethe(&p, variant, &config)?;

    let mut table = Table::new(&[
        "ell", "roots", "residual", "t_bethe_re", "t_bethe_im", "t_spectral", "delta_t", "u_spread", "source",
    ]);
    let mut rows = Vec::new();
    for set in &report.sets {
        let delta = (set.eigenvalue - Complex64::new(set.spectral_value, 0.0)).norm();
        let source = serde_json::to_value(set.source)?;
        let roots_text: Vec<String> = set.roots.iter().map(|z| format!("{} {}", cell(z.re), cell(z.im))).collect();
        table.push(vec![
            set.level.to_string(),
            roots_text.join(";"),
            cell(set.residual),
            cell(set.eigenvalue.re),
            cell(set.eigenvalue.im),
            cell(set.spectral_value),
            cell(delta),
            cell(set.u_spread),
            source["kind"].as_str().unwrap_or_default().to_string(),
        ]);
        rows.push(json!({
            "ell": set.level,
            "roots": complex_list(&set.roots),
            "residual": num(set.residual),
            "t_bethe": complex(set.eigenvalue),
            "t_spectral": num(set.spectral_value),
            "delta_t": num(delta),
            "u_spread": num(set.u_spread),
            "source": source,
        }));
    }
    let missing: Vec<Value> = report
        .missing
        .iter()
        .map(|&ell| json!({ "ell": ell, "t_spectral": num(report.spectrum[ell]) }))
        .collect();
    if !report.is_complete() {
        log::warn!("{} of {} eigenvalues unmatched", report.missing.len(), report.spectrum.len());
    }
    Ok(Outcome {
        json: json!({
            "params": params_json(&p),
            "ansatz": variant.to_string(),
            "rows": rows,
            "missing": missing,
            "complete": report.is_complete(),
            "starts_used": report.starts_used,
            "seed": c.seed,
        }),
        table,
        status: if report.is_complete() { Status::Ok } else { Status::Failed },
    })
}

#[derive(Deserialize)]
struct SignalRow {
    index: usize,
    re: f64,
    im: f64,
}

/// Reads `index,re,im` rows covering `0..2n` exactly once each.
fn read_signal(path: &Path, n: usize) -> Result<DVector<Complex64>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let len = 2 * n;
    let mut values: Vec<Option<Complex64>> = vec![None; len];
    for (line, row) in reader.deserialize::<SignalRow>().enumerate() {
        let row = row.with_context(|| format!("{}: bad record {}", path.display(), line + 1))?;
        let slot = values
            .get_mut(row.index)
            .with_context(|| format!("index {} is outside 0..{len}", row.index))?;
        if slot.is_some() {
            bail!("index {} appears twice", row.index);
        }
        *slot = Some(Complex64::new(row.re, row.im));
    }
    let values: Vec<Complex64> = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.with_context(|| format!("index {i} is missing")))
        .collect::<Result<_>>()?;
    Ok(DVector::from_vec(values))
}

fn sector_json(r: &ReconstructionReport) -> Value {
    json!({
        "verdict": r.verdict,
        "singular_values": r.singular_values.iter().map(|&s| num(s)).collect::<Vec<_>>(),
        "kept_modes": r.kept_modes,
        "discarded_modes": r.discarded_modes,
        "worst_kept_sigma": num(r.worst_kept_sigma),
        "condition": num(r.condition()),
    })
}

fn cmd_reconstruct(c: &Common, input: &Path) -> Result<Outcome> {
    // both sectors are reconstructed; the parity only fixes the grid
    let p = ModelParams::new(c.n, c.k, c.l, Parity::Plus)?;
    let f = read_signal(input, c.n)?;
    let full = reconstruct_full(&f, &p, c.tol)?;
    let norm = f.norm();
    let rel = if norm > 0.0 { (&full.f_hat - &f).norm() / norm } else { 0.0 };
    let mut table = Table::new(&["index", "re", "im"]);
    for (i, z) in full.f_hat.iter().enumerate() {
        table.push(vec![i.to_string(), cell(z.re), cell(z.im)]);
    }
    Ok(Outcome {
        json: json!({
            "params": { "n": c.n, "K": c.k, "L": c.l },
            "verdict": full.verdict(),
            "relative_error": num(rel),
            "plus": sector_json(&full.plus),
            "minus": sector_json(&full.minus),
            "f_hat": complex_list(full.f_hat.iter()),
        }),
        table,
        status: Status::Ok,
    })
}
