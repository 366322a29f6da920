//! JSON and CSV formats. Exact values travel as `"p/q"` strings.

use std::io::{Read, Write};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expand::{ExpansionFit, Sample};
use crate::kelvin::{BranchKind, KelvinFrame, PhaseBranch};
use crate::radial::RadialState;
use crate::scalar::{format_rational, parse_rational};
use crate::symfun::Spectrum;
use crate::{FMatrix, MultiPoly, QMatrix, QPoly, QRadPoly, QSpectrum, RadPoly, Rational};

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
}

fn as_usize(v: &Value, key: &str) -> Result<usize> {
    field(v, key)?.as_u64().map(|x| x as usize).ok_or_else(|| Error::Parse(format!("{key:?} must be a non-negative integer")))
}

fn as_f64(v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::Parse(format!("expected a number, got {v}")))
}

fn as_array<'a>(v: &'a Value, key: &str) -> Result<&'a Vec<Value>> {
    field(v, key)?.as_array().ok_or_else(|| Error::Parse(format!("{key:?} must be an array")))
}

/// A rational from either a `"p/q"` string or a JSON number (read exactly
/// in decimal).
pub fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        _ => Err(Error::Parse(format!("expected a rational, got {v}"))),
    }
}

pub fn poly_to_json(p: &QPoly) -> Value {
    let terms: Vec<Value> = p.terms().map(|(e, c)| json!({ "coef": format_rational(c), "exp": e })).collect();
    json!({ "n_vars": p.n_vars(), "terms": terms })
}

pub fn poly_from_json(v: &Value) -> Result<QPoly> {
    let n = as_usize(v, "n_vars")?;
    let mut terms = Vec::new();
    for t in as_array(v, "terms")? {
        let c = rational_from_json(field(t, "coef")?)?;
        let e = field(t, "exp")?
            .as_array()
            .ok_or_else(|| Error::Parse("\"exp\" must be an array".into()))?
            .iter()
            .map(|x| x.as_u64().map(|k| k as u32).ok_or_else(|| Error::Parse("exponents must be non-negative integers".into())))
            .collect::<Result<Vec<u32>>>()?;
        terms.push((e, c));
    }
    MultiPoly::from_terms(n, terms)
}

pub fn radpoly_to_json(e: &QRadPoly) -> Value {
    let slots: Vec<Value> = e.slots().iter().map(|(k, p)| json!({ "k": k, "poly": poly_to_json(p) })).collect();
    let mut out = json!({ "n_vars": e.n_vars(), "slots": slots });
    if e.dim() != e.n_vars() {
        out["dim"] = json!(e.dim());
    }
    out
}

pub fn radpoly_from_json(v: &Value) -> Result<QRadPoly> {
    let n = as_usize(v, "n_vars")?;
    let dim = match v.get("dim") {
        Some(_) => as_usize(v, "dim")?,
        None => n,
    };
    if dim == 0 || dim > n {
        return Err(Error::Parse(format!("dim {dim} must lie in 1..={n}")));
    }
    let mut slots = Vec::new();
    for s in as_array(v, "slots")? {
        let k = field(s, "k")?.as_i64().ok_or_else(|| Error::Parse("slot \"k\" must be an integer".into()))? as i32;
        let p = poly_from_json(field(s, "poly")?)?;
        if p.n_vars() != n {
            return Err(Error::Parse("slot polynomial has the wrong n_vars".into()));
        }
        slots.push((k, p));
    }
    Ok(RadPoly::from_slots(n, dim, slots))
}

pub fn spectrum_to_json(s: &QSpectrum) -> Value {
    json!({ "n": s.n(), "lambda": s.lambda.iter().map(format_rational).collect::<Vec<_>>() })
}

pub fn spectrum_from_json(v: &Value) -> Result<QSpectrum> {
    let n = as_usize(v, "n")?;
    let lambda = as_array(v, "lambda")?.iter().map(rational_from_json).collect::<Result<Vec<_>>>()?;
    if lambda.len() != n {
        return Err(Error::Parse(format!("lambda has {} entries, n = {n}", lambda.len())));
    }
    Ok(Spectrum::new(lambda))
}

pub fn exact_matrix_to_json(m: &QMatrix) -> Value {
    let entries: Vec<String> = m.rows().iter().flatten().map(format_rational).collect();
    json!({ "n": m.n(), "entries": entries })
}

pub fn float_matrix_to_json(m: &FMatrix) -> Value {
    let entries: Vec<f64> = m.rows().into_iter().flatten().collect();
    json!({ "n": m.n(), "entries": entries })
}

fn matrix_entries(v: &Value) -> Result<(usize, Vec<Value>)> {
    let entries = as_array(v, "entries")?.clone();
    let n = match v.get("n") {
        Some(_) => as_usize(v, "n")?,
        None => (entries.len() as f64).sqrt().round() as usize,
    };
    if n * n != entries.len() {
        return Err(Error::Parse(format!("{} entries do not form an {n}x{n} matrix", entries.len())));
    }
    Ok((n, entries))
}

pub fn exact_matrix_from_json(v: &Value) -> Result<QMatrix> {
    let (n, e) = matrix_entries(v)?;
    let vals = e.iter().map(rational_from_json).collect::<Result<Vec<_>>>()?;
    Ok(QMatrix::from_fn(n, |i, j| vals[i * n + j].clone()))
}

pub fn float_matrix_from_json(v: &Value) -> Result<FMatrix> {
    let (n, e) = matrix_entries(v)?;
    let vals = e.iter().map(as_f64).collect::<Result<Vec<_>>>()?;
    Ok(FMatrix::from_fn(n, |i, j| vals[i * n + j]))
}

pub fn frame_to_json(f: &KelvinFrame) -> Value {
    let mut branch = json!({ "kind": f.branch.kind.to_string(), "theta": f.branch.theta });
    if matches!(f.branch.kind, BranchKind::Log | BranchKind::Atan2) {
        branch["tau"] = json!(f.branch.tau);
    }
    json!({ "n": f.n, "branch": branch, "lambda": f.lambda, "b": f.linear, "c": f.constant })
}

/// Reads a branch object `{ "kind", "theta", "tau"? }`; `tau` is required
/// for the LOG and ATAN2 kinds.
pub fn branch_from_json(v: &Value) -> Result<PhaseBranch> {
    let kind: BranchKind = field(v, "kind")?.as_str().ok_or_else(|| Error::Parse("\"kind\" must be a string".into()))?.parse()?;
    let theta = as_f64(field(v, "theta")?)?;
    match kind {
        BranchKind::Slag => Ok(PhaseBranch::slag(theta)),
        BranchKind::Recip => Ok(PhaseBranch::recip(theta)),
        _ => PhaseBranch::new(kind, as_f64(field(v, "tau")?)?, theta),
    }
}

pub fn frame_from_json(v: &Value) -> Result<KelvinFrame> {
    let n = as_usize(v, "n")?;
    let branch = branch_from_json(field(v, "branch")?)?;
    let floats = |key: &str| -> Result<Vec<f64>> { as_array(v, key)?.iter().map(as_f64).collect() };
    let lambda = floats("lambda")?;
    let linear = match v.get("b") {
        Some(_) => floats("b")?,
        None => vec![0.0; n],
    };
    let c = match v.get("c") {
        Some(x) => as_f64(x)?,
        None => 0.0,
    };
    if lambda.len() != n {
        return Err(Error::Parse(format!("lambda has {} entries, n = {n}", lambda.len())));
    }
    KelvinFrame::new(branch, lambda, linear, c)
}

pub fn fit_to_json(fit: &ExpansionFit) -> Value {
    json!({
        "A": fit.a.rows(),
        "b": fit.b,
        "c": fit.c,
        "d": fit.d,
        "decay_slope": fit.decay_slope,
        "decay_slope_stderr": fit.decay_slope_stderr,
        "annuli": fit.annuli.iter().map(|(a, b)| [*a, *b]).collect::<Vec<_>>(),
        "medians": fit.medians,
        "rms_outer": fit.rms_outer,
        "remainder_max": fit.remainder_max,
    })
}

/// Reads `x1,…,xn,u` rows; the dimension comes from the header.
pub fn read_samples(reader: impl Read) -> Result<Vec<Sample>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let n = headers.len().checked_sub(1).filter(|&n| n >= 1).ok_or_else(|| Error::Parse("need at least x1,u".into()))?;
    for (i, h) in headers.iter().enumerate() {
        let want = if i < n { format!("x{}", i + 1) } else { "u".to_string() };
        if h != want {
            return Err(Error::Parse(format!("column {} is {h:?}, expected {want:?}", i + 1)));
        }
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| Error::Parse(format!("not a number: {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        out.push(Sample { x: vals[..n].to_vec(), u: vals[n] });
    }
    Ok(out)
}

pub fn write_samples(mut w: impl Write, samples: &[Sample]) -> Result<()> {
    let n = samples.first().map_or(0, |s| s.x.len());
    let header: Vec<String> = (1..=n).map(|i| format!("x{i}")).chain(["u".to_string()]).collect();
    writeln!(w, "{}", header.join(","))?;
    for s in samples {
        let row: Vec<String> = s.x.iter().chain([&s.u]).map(|v| v.to_string()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Writes every `stride`-th node (and always the last one).
pub fn write_radial(mut w: impl Write, traj: &[RadialState], stride: usize) -> Result<()> {
    let stride = stride.max(1);
    writeln!(w, "r,u,du,conservation_residual")?;
    for (i, s) in traj.iter().enumerate() {
        if i % stride == 0 || i + 1 == traj.len() {
            writeln!(w, "{},{},{},{}", s.r, s.u, s.p, s.conservation_residual)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn poly_round_trip() {
        let mut p = QPoly::zero(3);
        p.add_term(vec![2, 0, 1], rat(3, 2));
        p.add_term(vec![0, 0, 0], int(-1));
        let v = poly_to_json(&p);
        assert_eq!(v["terms"][1]["coef"], "3/2");
        assert_eq!(poly_from_json(&v).unwrap(), p);
    }

    #[test]
    fn radpoly_round_trip() {
        let e = &RadPoly::from_poly(-1, QPoly::var(3, 0)) + &RadPoly::from_poly(2, QPoly::one(3));
        assert_eq!(radpoly_from_json(&radpoly_to_json(&e)).unwrap(), e);
    }

    #[test]
    fn spectrum_parsing() {
        let v: Value = serde_json::from_str(r#"{ "n": 3, "lambda": ["1", "2", "-1/2"] }"#).unwrap();
        assert_eq!(spectrum_from_json(&v).unwrap().lambda, vec![int(1), int(2), rat(-1, 2)]);
        let bad: Value = serde_json::from_str(r#"{ "n": 2, "lambda": ["1"] }"#).unwrap();
        assert!(spectrum_from_json(&bad).is_err());
    }

    #[test]
    fn frame_round_trip() {
        let v: Value = serde_json::from_str(
            r#"{ "n": 3, "branch": { "kind": "SLAG", "theta": 2.3562 }, "lambda": [1, 1, 1], "b": [0, 0, 0], "c": 0.0 }"#,
        )
        .unwrap();
        let f = frame_from_json(&v).unwrap();
        assert_eq!(frame_from_json(&frame_to_json(&f)).unwrap(), f);
    }

    #[test]
    fn samples_round_trip() {
        let s = vec![Sample { x: vec![1.5, -2.0], u: 0.25 }];
        let mut buf = Vec::new();
        write_samples(&mut buf, &s).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "x1,x2,u\n1.5,-2,0.25\n");
        assert_eq!(read_samples(buf.as_slice()).unwrap(), s);
        assert!(read_samples("a,b\n1,2\n".as_bytes()).is_err());
    }
}
