use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use kelvinasym::equations::{log_slope, symbolic_residual_n3, transformed_residual};
use kelvinasym::exactalg::solve_radical_poisson;
use kelvinasym::expand::{
    fit_expansion_with, leading_correction_q2, next_correction_n3, radical_part_degrees, ExpansionState, FitOptions,
};
use kelvinasym::io;
use kelvinasym::kelvin::{hessian_identity_check, Jet2};
use kelvinasym::radial::{geometric_annuli, integrate_exterior, radial_field_samples};
use kelvinasym::random;
use kelvinasym::scalar::{format_rational, parse_rational};
use kelvinasym::symfun::{linear_coefficient_sigma, verify_identity, BranchParams, Lemma};
use kelvinasym::{
    BranchKind, Error, HomoPoly, KelvinFrame, PhaseBranch, QMatrix, QPoly, QSpectrum, Rational, Scalar, Spectrum,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::*;

/// Why a command did not succeed.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or inputs; exit code 2.
    Usage(String),
    /// A check was violated; the report has been written. Exit code 1.
    Failed(String),
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Library errors caused by the inputs are usage errors; the rest mean a
/// computation went wrong.
fn lib(e: Error) -> CliError {
    match e {
        Error::Mismatch(_) | Error::Solve(_) | Error::Domain { .. } | Error::Conditioning(_) | Error::InsufficientData(_) => {
            CliError::Failed(e.to_string())
        }
        _ => CliError::Usage(e.to_string()),
    }
}

pub fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Lemmas(a) => lemmas(a),
        Command::KelvinCheck(a) => kelvin_check(a),
        Command::Poisson(a) => poisson(a),
        Command::ResidualN3(a) => residual_n3(a),
        Command::Expand3(a) => expand3(a),
        Command::Radial(a) => radial(a),
        Command::Fit(a) => fit(a),
        Command::ResidualScaling(a) => residual_scaling(a),
    }
}

fn check_out(out: &Option<PathBuf>) -> CliResult<()> {
    if let Some(p) = out {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(usage(format!("output directory {} does not exist", parent.display())));
        }
    }
    Ok(())
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(usage),
    }
}

fn emit_json(out: &Option<PathBuf>, v: &Value) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialise");
    s.push('\n');
    emit(out, &s)
}

/// Writes the report, then turns a recorded failure into the exit status.
fn finish(out: &Option<PathBuf>, report: &Value, failure: Option<String>) -> CliResult<()> {
    emit_json(out, report)?;
    match failure {
        Some(f) => Err(CliError::Failed(f)),
        None => Ok(()),
    }
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_poly(path: &Path) -> CliResult<QPoly> {
    io::poly_from_json(&read_json(path)?).map_err(usage)
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

fn rationals(s: &str) -> CliResult<Vec<Rational>> {
    split_list(s).map(|t| parse_rational(t).map_err(usage)).collect()
}

fn floats(s: &str) -> CliResult<Vec<f64>> {
    Ok(rationals(s)?.iter().map(Scalar::to_f64_lossy).collect())
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    random::rng(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn branch_from(a: &BranchArgs) -> CliResult<PhaseBranch> {
    let kind: BranchKind = a.branch.parse().map_err(usage)?;
    let b = match (kind, a.tau, a.a) {
        (BranchKind::Slag, None, None) => PhaseBranch::slag(a.theta),
        (BranchKind::Recip, None, None) => PhaseBranch::recip(a.theta),
        (_, Some(tau), None) => PhaseBranch::new(kind, tau, a.theta).map_err(usage)?,
        (BranchKind::Log | BranchKind::Atan2, None, Some(cot)) => PhaseBranch::from_a(cot, a.theta).map_err(usage)?,
        (BranchKind::Log | BranchKind::Atan2, None, None) => {
            return Err(usage(format!("branch {kind} needs --a or --tau")));
        }
        (_, Some(_), Some(_)) => return Err(usage("give only one of --a and --tau")),
        (_, None, Some(_)) => return Err(usage(format!("--a is not used by branch {kind}"))),
    };
    if b.kind != kind {
        return Err(usage(format!("--a {} selects branch {}, not {kind}", b.a, b.kind)));
    }
    Ok(b)
}

fn branch_json(b: &PhaseBranch) -> Value {
    json!({ "kind": b.kind.to_string(), "tau": b.tau, "a": b.a, "b": b.b, "theta": b.theta })
}

fn frame_from(
    frame: &Option<PathBuf>,
    branch: &BranchArgs,
    lambda: &Option<String>,
    n: Option<usize>,
) -> CliResult<KelvinFrame> {
    if let Some(p) = frame {
        return io::frame_from_json(&read_json(p)?).map_err(usage);
    }
    let lambda = match (lambda, n) {
        (Some(l), _) => floats(l)?,
        (None, Some(n)) => vec![0.0; n],
        (None, None) => return Err(usage("give --frame, --lambda or --n")),
    };
    if let Some(n) = n {
        if n != lambda.len() {
            return Err(usage(format!("--n {n} but {} eigenvalues", lambda.len())));
        }
    }
    if lambda.len() < 2 {
        return Err(usage("the dimension must be at least 2"));
    }
    KelvinFrame::centered(branch_from(branch)?, lambda).map_err(usage)
}

fn spectrum_from(a: &SpectrumArgs, rng: &mut impl Rng, n: usize) -> CliResult<QSpectrum> {
    let s = match (&a.lambda, &a.spectrum) {
        (Some(_), Some(_)) => return Err(usage("give only one of --lambda and --spectrum")),
        (Some(l), None) => Spectrum::new(rationals(l)?),
        (None, Some(p)) => io::spectrum_from_json(&read_json(p)?).map_err(usage)?,
        (None, None) => random::spectrum(rng, n),
    };
    if s.n() != n {
        return Err(usage(format!("expected {n} eigenvalues, got {}", s.n())));
    }
    Ok(s)
}

fn lemma_checks(n: usize, seed: u64, trial: usize) -> Vec<(&'static str, i64, Value, bool)> {
    let mut rng = rng_for(seed, trial as u64);
    let s = random::spectrum(&mut rng, n);
    let p = loop {
        let p = BranchParams { a: random::small_rational(&mut rng), b: random::small_rational(&mut rng) };
        if p.b != Rational::from_int(0) {
            break p;
        }
    };
    let mut b = QMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = random::small_rational(&mut rng);
            b.set(i, j, v.clone());
            b.set(j, i, v);
        }
    }
    let inputs = json!({
        "trial": trial,
        "lambda": s.lambda.iter().map(format_rational).collect::<Vec<_>>(),
        "a": format_rational(&p.a),
        "b": format_rational(&p.b),
    });
    let mut out = Vec::new();
    let mut push = |lemma, aux, ok: bool| out.push((lemma, aux, inputs.clone(), ok));
    let exact = |lemma, p: Option<&BranchParams<Rational>>, aux| {
        verify_identity(lemma, &s, p, Some(aux)).is_ok_and(|r| r.equal)
    };
    // Linear coefficients of σ_k(A + tB); a disagreement shows up as an error.
    for k in 1..=n as i64 {
        push("L31", k, linear_coefficient_sigma(k, &s, &b).is_ok());
    }
    for k in 0..=n as i64 {
        push("L33", k, exact(Lemma::L33, Some(&p), k));
    }
    if n >= 3 {
        for i in 1..=n as i64 {
            push("L32", i, exact(Lemma::L32, None, i));
            push("L34", i, exact(Lemma::L34, Some(&p), i));
        }
    }
    out
}

fn lemmas(a: LemmasArgs) -> CliResult<()> {
    check_out(&a.common.out)?;
    if a.n < 2 {
        return Err(usage(format!("--n must be at least 2 (got {})", a.n)));
    }
    if a.trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    let results: Vec<_> = (0..a.trials).into_par_iter().map(|t| lemma_checks(a.n, a.common.seed, t)).collect();
    let mut counts = serde_json::Map::new();
    let mut failures = 0usize;
    let mut first = Value::Null;
    for (lemma, aux, inputs, ok) in results.into_iter().flatten() {
        let key = lemma.to_string();
        let entry = counts.entry(key.clone()).or_insert_with(|| json!({ "checks": 0, "failures": 0 }));
        entry["checks"] = json!(entry["checks"].as_u64().unwrap() + 1);
        if !ok {
            entry["failures"] = json!(entry["failures"].as_u64().unwrap() + 1);
            failures += 1;
            if first.is_null() {
                first = json!({ "lemma": key, "aux": aux, "inputs": inputs });
            }
        }
    }
    let report = json!({
        "command": "lemmas",
        "n": a.n,
        "trials": a.trials,
        "seed": a.common.seed,
        "lemmas": counts,
        "failures": failures,
        "first_failure": first,
        "all_pass": failures == 0,
    });
    let failure = (failures > 0).then(|| format!("first failing check: {first}"));
    finish(&a.common.out, &report, failure)
}

fn kelvin_check(a: KelvinCheckArgs) -> CliResult<()> {
    check_out(&a.common.out)?;
    let frame = frame_from(&a.frame, &a.branch, &a.lambda, a.n)?;
    let n = frame.n;
    let mut rng = rng_for(a.common.seed, 0);
    let v = match &a.poly {
        Some(p) => read_poly(p)?,
        None => random::polynomial(&mut rng, n, 3),
    };
    if v.n_vars() != n {
        return Err(usage(format!("v has {} variables, frame has n = {n}", v.n_vars())));
    }
    if !(a.rmin > 0.0 && a.rmax > a.rmin && a.step > 0.0) {
        return Err(usage("need 0 < rmin < rmax and step > 0"));
    }
    let mut xs = Vec::with_capacity(a.samples);
    let mut attempts = 0;
    while xs.len() < a.samples {
        attempts += 1;
        if attempts > 100 * a.samples.max(1) {
            return Err(usage("sample radii do not reach the exterior region |Rx| > 1"));
        }
        let r = rng.gen_range(a.rmin..a.rmax);
        let x: Vec<f64> = random::direction(&mut rng, n).iter().map(|d| d * r).collect();
        let y = frame.forward(&x).map_err(lib)?;
        if y.iter().map(|c| c * c).sum::<f64>() < 1.0 {
            xs.push(x);
        }
    }
    let rep = hessian_identity_check(&frame, &v, &xs, a.step).map_err(lib)?;
    let pass = rep.max_rel < a.tol;
    let report = json!({
        "command": "kelvin-check",
        "frame": io::frame_to_json(&frame),
        "v": io::poly_to_json(&v),
        "samples": rep.samples,
        "step": a.step,
        "max_abs": rep.max_abs,
        "max_rel": rep.max_rel,
        "tol": a.tol,
        "pass": pass,
    });
    finish(&a.common.out, &report, (!pass).then(|| format!("max relative error {} >= {}", rep.max_rel, a.tol)))
}

fn poisson(a: PoissonArgs) -> CliResult<()> {
    check_out(&a.common.out)?;
    let h = match &a.h {
        Some(p) => HomoPoly::from_poly(read_poly(p)?).map_err(usage)?,
        None => {
            if a.n == 0 {
                return Err(usage("--n must be positive"));
            }
            random::homogeneous(&mut rng_for(a.common.seed, 0), a.n, a.degree)
        }
    };
    let u = solve_radical_poisson(&h, a.n).map_err(lib)?;
    let report = json!({
        "command": "poisson",
        "n": a.n,
        "degree": h.degree(),
        "h": io::poly_to_json(h.base()),
        "u": io::poly_to_json(u.base()),
        "residual_zero": true,
    });
    finish(&a.common.out, &report, None)
}

fn residual_n3(a: ResidualN3Args) -> CliResult<()> {
    check_out(&a.common.out)?;
    let mut rng = rng_for(a.common.seed, 0);
    let s = spectrum_from(&a.spectrum, &mut rng, 3)?;
    let p = match &a.p {
        Some(path) => read_poly(path)?,
        None => random::polynomial(&mut rng, 3, 2),
    };
    let q = match &a.q {
        Some(path) => read_poly(path)?,
        None => QPoly::zero(3),
    };
    let res = symbolic_residual_n3(&p, &q, &s).map_err(lib)?;
    let report = json!({
        "command": "residual-n3",
        "spectrum": io::spectrum_to_json(&s),
        "p": io::poly_to_json(&p),
        "q": io::poly_to_json(&q),
        "residual": io::radpoly_to_json(&res),
        "min_exponent": res.min_exponent(),
    });
    finish(&a.common.out, &report, None)
}

fn expand3(a: Expand3Args) -> CliResult<()> {
    check_out(&a.common.out)?;
    if a.order < 2 {
        return Err(usage("--order must be at least 2"));
    }
    let mut rng = rng_for(a.common.seed, 0);
    let s = spectrum_from(&a.spectrum, &mut rng, 3)?;
    let p = match &a.p {
        Some(path) => read_poly(path)?,
        None => random::polynomial(&mut rng, 3, 2),
    };
    let deg = p.degree().unwrap_or(0).max(2);
    // P is fixed data; the recursion starts clearing from degree 2.
    let mut st = ExpansionState::new(s.clone(), p.clone(), QPoly::zero(3), deg).map_err(lib)?;
    st.order = 2;
    let q2 = leading_correction_q2(&p.constant_term(), &s).map_err(lib)?;
    let mut steps = Vec::new();
    let mut first_matches = None;
    while st.order < a.order {
        let next = next_correction_n3(&st).map_err(lib)?;
        let added = &next.q - &st.q;
        if st.order == 2 {
            first_matches = Some(&added == q2.base());
        }
        steps.push(json!({ "order": st.order, "correction": io::poly_to_json(&added) }));
        st = next;
    }
    let degrees = radical_part_degrees(&st.residual().map_err(lib)?).map_err(lib)?;
    let audit = degrees.iter().all(|&d| d >= a.order);
    let mut failure = None;
    if !audit {
        failure = Some(format!("|y|^-1 slot keeps degrees {degrees:?} below order {}", a.order));
    } else if first_matches == Some(false) {
        failure = Some("first correction differs from the leading correction".to_string());
    }
    let report = json!({
        "command": "expand3",
        "spectrum": io::spectrum_to_json(&s),
        "p": io::poly_to_json(&p),
        "order": a.order,
        "q": io::poly_to_json(&st.q),
        "steps": steps,
        "leading_correction": io::poly_to_json(q2.base()),
        "first_matches_leading": first_matches,
        "radical_degrees": degrees,
        "audit_pass": audit,
    });
    finish(&a.common.out, &report, failure)
}

fn radial(a: RadialArgs) -> CliResult<()> {
    check_out(&a.common.out)?;
    check_out(&a.field_samples)?;
    let branch = branch_from(&a.branch)?;
    if a.n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    if !(a.step > 0.0 && a.rmax >= 1.0) {
        return Err(usage("need --step > 0 and --rmax >= 1"));
    }
    let traj = integrate_exterior(&branch, a.n, branch.theta, a.u1, a.p1, a.rmax, a.step);
    let (traj, failure) = match traj {
        Ok(t) => (t, None),
        Err(f) => (f.partial.clone(), Some(f.to_string())),
    };
    let mut csv = Vec::new();
    io::write_radial(&mut csv, &traj, a.stride).map_err(usage)?;
    emit(&a.common.out, &String::from_utf8(csv).expect("CSV is UTF-8"))?;
    if let Some(f) = failure {
        return Err(CliError::Failed(f));
    }
    if let Some(path) = &a.field_samples {
        if !(a.sample_rmin >= 1.0 && a.sample_rmin < a.rmax && a.annuli > 0) {
            return Err(usage("need 1 <= --sample-rmin < --rmax and --annuli > 0"));
        }
        let center = match &a.center {
            Some(c) => floats(c)?,
            None => vec![0.0; a.n],
        };
        if center.len() != a.n {
            return Err(usage(format!("--center needs {} coordinates", a.n)));
        }
        let mut rng = rng_for(a.common.seed, 1);
        let annuli = geometric_annuli(a.sample_rmin, a.rmax, a.annuli);
        let samples = radial_field_samples(&traj, &center, &annuli, a.per_annulus, &mut rng);
        let mut buf = Vec::new();
        io::write_samples(&mut buf, &samples).map_err(usage)?;
        fs::write(path, buf).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn fit(a: FitArgs) -> CliResult<()> {
    check_out(&a.common.out)?;
    let file = fs::File::open(&a.samples).map_err(|e| usage(format!("cannot read {}: {e}", a.samples.display())))?;
    let samples = io::read_samples(file).map_err(usage)?;
    let n = samples.first().map(|s| s.x.len()).ok_or_else(|| usage("no samples"))?;
    let branch = branch_from(&a.branch)?;
    let opts = FitOptions { annuli: a.annuli, log_term: !a.no_log, passes: a.passes, ..FitOptions::default() };
    let fit = fit_expansion_with(&samples, n, &branch, &opts).map_err(lib)?;
    let mut report = io::fit_to_json(&fit);
    report["command"] = json!("fit");
    report["n"] = json!(n);
    report["samples"] = json!(samples.len());
    report["branch"] = branch_json(&branch);
    finish(&a.common.out, &report, None)
}

fn residual_scaling(a: ResidualScalingArgs) -> CliResult<()> {
    check_out(&a.common.out)?;
    let frame = frame_from(&a.frame, &a.branch, &a.lambda, a.n)?;
    let n = frame.n;
    let mut rng = rng_for(a.common.seed, 0);
    let v = match &a.poly {
        Some(p) => read_poly(p)?,
        None => {
            let mut v = random::polynomial(&mut rng, n, 3);
            v.add_term(vec![0; n], Rational::from_int(1));
            v
        }
    };
    if v.n_vars() != n {
        return Err(usage(format!("v has {} variables, frame has n = {n}", v.n_vars())));
    }
    let dir = match &a.direction {
        Some(d) => {
            let d = floats(d)?;
            let len = d.iter().map(|c| c * c).sum::<f64>().sqrt();
            if d.len() != n || len == 0.0 {
                return Err(usage(format!("--direction needs {n} coordinates, not all zero")));
            }
            d.iter().map(|c| c / len).collect()
        }
        None => random::direction(&mut rng, n),
    };
    let ts = match &a.ts {
        Some(t) => floats(t)?,
        None => (3..=10).map(|k| 0.5f64.powi(k)).collect(),
    };
    if ts.iter().any(|&t| !(t > 0.0 && t < 1.0)) || ts.len() < 2 {
        return Err(usage("--ts needs at least two radii in (0, 1)"));
    }
    let mut points = Vec::new();
    let mut logs = Vec::new();
    for &t in &ts {
        let y: Vec<f64> = dir.iter().map(|d| d * t).collect();
        let b = transformed_residual(&Jet2::of_poly(&v, &y).map_err(lib)?, &frame).map_err(lib)?;
        points.push(json!({ "t": t, "laplace": b.laplace_term, "nonlinear": b.nonlinear_term }));
        if b.nonlinear_term != 0.0 {
            logs.push((t.ln(), b.nonlinear_term.abs().ln()));
        }
    }
    if logs.len() < 2 {
        return Err(CliError::Failed("nonlinear term vanishes along the ray".into()));
    }
    let (slope, stderr) = log_slope(&logs);
    let bound = n as f64 - 2.0 - a.margin;
    let pass = slope >= bound;
    let report = json!({
        "command": "residual-scaling",
        "frame": io::frame_to_json(&frame),
        "v": io::poly_to_json(&v),
        "direction": dir,
        "points": points,
        "slope": slope,
        "slope_stderr": stderr,
        "bound": bound,
        "pass": pass,
    });
    finish(&a.common.out, &report, (!pass).then(|| format!("slope {slope} below {bound}")))
}
