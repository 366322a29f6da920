//! Correction recursion for the Kelvin profile in three dimensions and
//! least-squares fitting of the exterior expansion from samples.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::equations::{log_slope, symbolic_residual_n3};
use crate::error::{Error, Result};
use crate::exactalg::{solve_radical_poisson, HomoPoly, MultiPoly};
use crate::kelvin::{scaling_matrix, KelvinFrame, PhaseBranch};
use crate::symfun::Spectrum;
use crate::{FMatrix, QPoly, QRadPoly, QSpectrum, Rational};

/// `Q₂ = ½ v₀² Σ λ_i y_i²`, the first forced radical correction for a
/// profile with `v(0) = v₀`.
pub fn leading_correction_q2(v0: &Rational, s: &QSpectrum) -> Result<HomoPoly<Rational>> {
    if s.n() != 3 {
        return Err(Error::Dimension(format!("leading correction is for n = 3, got {}", s.n())));
    }
    let half_v2 = v0.clone() * v0.clone() / Rational::from_integer(2.into());
    let mut p = MultiPoly::zero(3);
    for (i, l) in s.lambda.iter().enumerate() {
        let mut e = vec![0; 3];
        e[i] = 2;
        p.add_term(e, half_v2.clone() * l.clone());
    }
    HomoPoly::new(p, 2)
}

/// State `v = P + |y|^{n−2} Q` of the correction recursion at order `ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionState {
    pub n: usize,
    pub spectrum: QSpectrum,
    pub p: QPoly,
    pub q: QPoly,
    pub order: u32,
}

impl ExpansionState {
    pub fn new(spectrum: QSpectrum, p: QPoly, q: QPoly, order: u32) -> Result<Self> {
        let n = spectrum.n();
        if p.n_vars() != n || q.n_vars() != n {
            return Err(Error::Dimension("P and Q must have n variables".into()));
        }
        if q.terms().any(|(e, _)| e.iter().sum::<u32>() < 2) {
            return Err(Error::Dimension("Q must vanish to second order at the origin".into()));
        }
        if p.degree().unwrap_or(0) > order {
            return Err(Error::Dimension(format!("deg P exceeds the order {order}")));
        }
        if q.degree().is_some_and(|d| d as i64 > order as i64 - n as i64 + 2) {
            return Err(Error::Dimension(format!("deg Q exceeds order - n + 2 at order {order}")));
        }
        Ok(ExpansionState { n, spectrum, p, q, order })
    }

    pub fn residual(&self) -> Result<QRadPoly> {
        symbolic_residual_n3(&self.p, &self.q, &self.spectrum)
    }
}

/// Degrees of the homogeneous components in the `|y|^{-1}` part of a
/// residual.
pub fn radical_part_degrees(res: &QRadPoly) -> Result<Vec<u32>> {
    Ok(res.part_at(-1)?.homogeneous_parts_in(res.dim()).into_keys().collect())
}

/// One step of the recursion: removes the degree-`ℓ` component of the
/// `|y|^{-1}` part of the residual by a radical Poisson solve and moves
/// to order `ℓ + 1`.
pub fn next_correction_n3(state: &ExpansionState) -> Result<ExpansionState> {
    if state.n != 3 {
        return Err(Error::Dimension(format!("correction recursion is for n = 3, got {}", state.n)));
    }
    let res = state.residual()?;
    let source = res.part_at(-1)?.homogeneous_component(state.order);
    let mut next = state.clone();
    next.order += 1;
    if source.is_zero() {
        return Ok(next);
    }
    let u = solve_radical_poisson(&HomoPoly::new(source, state.order)?, 3)?;
    next.q = &next.q - u.base();
    Ok(next)
}

/// One exterior sample `(x, u(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Number of geometric annuli the radial range is split into.
    pub annuli: usize,
    /// Include the `log(xᵀR²x)` term for `n = 2`.
    pub log_term: bool,
    /// Include `|Rx|^{2−n}{1, y_i}` nuisance columns, which absorb the
    /// leading remainder so it does not bias the quadratic part.
    pub remainder_terms: bool,
    /// Refinement passes after the initial quadratic-only fit.
    pub passes: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { annuli: 6, log_term: true, remainder_terms: true, passes: 2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionFit {
    pub a: FMatrix,
    pub b: Vec<f64>,
    pub c: f64,
    /// Coefficient of `½ log(xᵀR²x)`; only for `n = 2`.
    pub d: Option<f64>,
    pub decay_slope: f64,
    pub decay_slope_stderr: f64,
    pub annuli: Vec<(f64, f64)>,
    /// Median `|u − fit|` per annulus.
    pub medians: Vec<f64>,
    /// RMS of the full model residual over the outer annulus.
    pub rms_outer: f64,
    /// Largest `|u − fit|` over all samples.
    pub remainder_max: f64,
}

impl ExpansionFit {
    /// Evaluates `½xᵀAx + b·x + c (+ ½ d log(xᵀR²x))`.
    pub fn evaluate(&self, x: &[f64], branch: &PhaseBranch) -> Result<f64> {
        let n = x.len();
        let mut q = self.c;
        for i in 0..n {
            q += self.b[i] * x[i];
            for j in 0..n {
                q += 0.5 * self.a.get(i, j) * x[i] * x[j];
            }
        }
        if let Some(d) = self.d {
            let r = full_scaling(branch, &self.a)?;
            let rx = &r * DVector::from_column_slice(x);
            q += 0.5 * d * rx.norm_squared().ln();
        }
        Ok(q)
    }

    /// The exact expansion data of a frame, with no fit statistics.
    pub fn from_frame(frame: &KelvinFrame) -> Self {
        ExpansionFit {
            a: FMatrix::from_diag(&frame.lambda),
            b: frame.linear.clone(),
            c: frame.constant,
            d: None,
            decay_slope: f64::NAN,
            decay_slope_stderr: f64::NAN,
            annuli: Vec::new(),
            medians: Vec::new(),
            rms_outer: 0.0,
            remainder_max: 0.0,
        }
    }
}

/// Branch scaling matrix for a general symmetric `A`, through its
/// eigendecomposition.
fn full_scaling(branch: &PhaseBranch, a: &FMatrix) -> Result<DMatrix<f64>> {
    let n = a.n();
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (a.get(i, j) + a.get(j, i)));
    let eig = SymmetricEigen::new(m);
    let r = scaling_matrix(branch, eig.eigenvalues.as_slice())?;
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&DVector::from_vec(r)) * eig.eigenvectors.transpose())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Design {
    /// Columns that make up the reported expansion.
    model: usize,
    rows: Vec<Vec<f64>>,
}

fn design(xs: &[Vec<f64>], scale: f64, r: Option<&DMatrix<f64>>, log_term: bool) -> Design {
    let n = xs[0].len();
    let mut rows = Vec::with_capacity(xs.len());
    let mut model = 0;
    for x in xs {
        let xt: Vec<f64> = x.iter().map(|v| v / scale).collect();
        let mut row = Vec::new();
        for i in 0..n {
            for j in i..n {
                row.push(xt[i] * xt[j]);
            }
        }
        row.extend_from_slice(&xt);
        row.push(1.0);
        let rx = r.map(|r| r * DVector::from_column_slice(&xt));
        if let (true, Some(rx)) = (log_term, &rx) {
            row.push(rx.norm_squared().ln());
        }
        model = row.len();
        if let Some(rx) = rx {
            let rn2 = rx.norm_squared();
            let w = rn2.powf((2.0 - n as f64) / 2.0);
            if n > 2 {
                row.push(w);
            }
            for i in 0..n {
                row.push(w * rx[i] / rn2);
            }
        }
        rows.push(row);
    }
    Design { model, rows }
}

fn least_squares(rows: &[Vec<f64>], u: &[f64]) -> Result<Vec<f64>> {
    let m = rows.len();
    let p = rows[0].len();
    let x = DMatrix::from_fn(m, p, |i, j| rows[i][j]);
    // Column equilibration keeps the condition check about the geometry
    // rather than the units of each basis function.
    let norms: Vec<f64> = (0..p).map(|j| x.column(j).norm().max(1e-300)).collect();
    let xs = DMatrix::from_fn(m, p, |i, j| x[(i, j)] / norms[j]);
    let svd = xs.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(cond <= 1e12) {
        return Err(Error::Conditioning(cond));
    }
    let beta = svd
        .solve(&DVector::from_column_slice(u), 0.0)
        .map_err(|e| Error::Solve(e.to_string()))?;
    Ok((0..p).map(|j| beta[j] / norms[j]).collect())
}

/// Fits `u ≈ ½xᵀAx + b·x + c (+ ½ d log(xᵀR²x) for n = 2)` on the outer
/// annulus and estimates the decay rate of the remainder.
pub fn fit_expansion(samples: &[Sample], n: usize, branch: &PhaseBranch) -> Result<ExpansionFit> {
    fit_expansion_with(samples, n, branch, &FitOptions::default())
}

pub fn fit_expansion_with(samples: &[Sample], n: usize, branch: &PhaseBranch, opts: &FitOptions) -> Result<ExpansionFit> {
    if n < 2 {
        return Err(Error::Dimension(format!("fitting needs n >= 2, got {n}")));
    }
    if samples.iter().any(|s| s.x.len() != n) {
        return Err(Error::Dimension("sample dimension differs from n".into()));
    }
    if opts.annuli < 3 {
        return Err(Error::InsufficientData("need at least 3 annuli".into()));
    }
    let radii: Vec<f64> = samples.iter().map(|s| norm(&s.x)).collect();
    let (rmin, rmax) = radii.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    if samples.is_empty() || !(rmin > 0.0) || !(rmax > rmin) {
        return Err(Error::InsufficientData("samples must span a range of positive radii".into()));
    }
    let k = opts.annuli;
    let ratio = rmax / rmin;
    let edges: Vec<f64> = (0..=k).map(|i| rmin * ratio.powf(i as f64 / k as f64)).collect();
    let which = |r: f64| -> usize { (((r / rmin).ln() / ratio.ln() * k as f64) as usize).min(k - 1) };
    let bins: Vec<usize> = radii.iter().map(|&r| which(r)).collect();
    let occupied = (0..k).filter(|b| bins.contains(b)).count();
    if occupied < 3 {
        return Err(Error::InsufficientData(format!("samples occupy only {occupied} annuli")));
    }
    let outer: Vec<usize> = (0..samples.len()).filter(|&i| bins[i] == k - 1).collect();
    let xs: Vec<Vec<f64>> = outer.iter().map(|&i| samples[i].x.clone()).collect();
    let us: Vec<f64> = outer.iter().map(|&i| samples[i].u).collect();
    let quad = n * (n + 1) / 2 + n + 1;
    let log_term = opts.log_term && n == 2;
    let params = quad + log_term as usize + if opts.remainder_terms { n + (n > 2) as usize } else { 0 };
    if xs.len() < 4 * params {
        return Err(Error::InsufficientData(format!(
            "outer annulus has {} samples, need {}",
            xs.len(),
            4 * params
        )));
    }
    let scale = edges[k];

    let unpack_a = |beta: &[f64]| -> FMatrix {
        let mut a = FMatrix::zeros(n);
        let mut idx = 0;
        for i in 0..n {
            for j in i..n {
                let v = beta[idx] / (scale * scale);
                if i == j {
                    a.set(i, i, 2.0 * v);
                } else {
                    a.set(i, j, v);
                    a.set(j, i, v);
                }
                idx += 1;
            }
        }
        a
    };

    let mut beta = least_squares(&design(&xs, scale, None, false).rows, &us)?;
    let mut r = None;
    let needs_r = log_term || opts.remainder_terms;
    if needs_r {
        for _ in 0..opts.passes.max(1) {
            let rm = full_scaling(branch, &unpack_a(&beta))?;
            let mut d = design(&xs, scale, Some(&rm), log_term);
            if !opts.remainder_terms {
                for row in &mut d.rows {
                    row.truncate(d.model);
                }
            }
            beta = least_squares(&d.rows, &us)?;
            r = Some(rm);
        }
    }
    let a = unpack_a(&beta);
    let lin0 = n * (n + 1) / 2;
    let b: Vec<f64> = (0..n).map(|i| beta[lin0 + i] / scale).collect();
    let mut c = beta[lin0 + n];
    let d = if log_term {
        let bl = beta[lin0 + n + 1];
        c -= 2.0 * bl * scale.ln();
        Some(2.0 * bl)
    } else {
        None
    };

    // Residuals of the reported model (and of the full model on the outer
    // annulus) in scaled coordinates, using the exact columns of the solve.
    let all_x: Vec<Vec<f64>> = samples.iter().map(|s| s.x.clone()).collect();
    let full = design(&all_x, scale, r.as_ref(), log_term);
    let full_cols = beta.len();
    let mut remainder = Vec::with_capacity(samples.len());
    let mut outer_sq = 0.0;
    for (i, row) in full.rows.iter().enumerate() {
        let model: f64 = row[..full.model].iter().zip(&beta).map(|(a, b)| a * b).sum();
        remainder.push(samples[i].u - model);
        if bins[i] == k - 1 {
            let fitted: f64 = row[..full_cols].iter().zip(&beta).map(|(a, b)| a * b).sum();
            outer_sq += (samples[i].u - fitted).powi(2);
        }
    }
    let rms_outer = (outer_sq / outer.len() as f64).sqrt();
    let remainder_max = remainder.iter().fold(0.0f64, |m, e| m.max(e.abs()));

    let mut annuli = Vec::new();
    let mut medians = Vec::new();
    let mut pts = Vec::new();
    for bin in 0..k {
        let mut errs: Vec<f64> = (0..samples.len()).filter(|&i| bins[i] == bin).map(|i| remainder[i].abs()).collect();
        if errs.is_empty() {
            continue;
        }
        errs.sort_by(f64::total_cmp);
        let mid = errs.len() / 2;
        let med = if errs.len() % 2 == 1 { errs[mid] } else { 0.5 * (errs[mid - 1] + errs[mid]) };
        let (lo, hi) = (edges[bin], edges[bin + 1]);
        annuli.push((lo, hi));
        medians.push(med);
        if med > 0.0 {
            pts.push(((lo * hi).sqrt().ln(), med.ln()));
        }
    }
    let (decay_slope, decay_slope_stderr) = if pts.len() >= 2 { log_slope(&pts) } else { (0.0, f64::INFINITY) };

    Ok(ExpansionFit { a, b, c, d, decay_slope, decay_slope_stderr, annuli, medians, rms_outer, remainder_max })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredV {
    /// `(y, v(y))` for every sample.
    pub points: Vec<(Vec<f64>, f64)>,
    /// Mean of `v` over the decile of samples with the smallest `|y|`.
    pub v0_estimate: f64,
}

/// Inverts `u = fit + |y|^{n−2} v(y)` at every sample.
pub fn recover_v(samples: &[Sample], fit: &ExpansionFit, frame: &KelvinFrame) -> Result<RecoveredV> {
    let n = frame.n;
    for i in 0..n {
        let tol = 1e-6 * (1.0 + frame.lambda[i].abs());
        if (fit.a.get(i, i) - frame.lambda[i]).abs() > tol {
            return Err(Error::Mismatch(format!(
                "fit A[{i}][{i}] = {} differs from frame lambda {}",
                fit.a.get(i, i),
                frame.lambda[i]
            )));
        }
    }
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples".into()));
    }
    let mut points = Vec::with_capacity(samples.len());
    for s in samples {
        let y = frame.forward(&s.x)?;
        let rest = s.u - fit.evaluate(&s.x, &frame.branch)?;
        let v = rest * norm(&y).powi(2 - n as i32);
        points.push((y, v));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| norm(&points[i].0).total_cmp(&norm(&points[j].0)));
    let take = (points.len() / 10).max(1);
    let v0_estimate = order[..take].iter().map(|&i| points[i].1).sum::<f64>() / take as f64;
    Ok(RecoveredV { points, v0_estimate })
}

/// Exact rational spectrum from floats, for handing fitted data to the
/// exact algebra.
pub fn spectrum_from_f64(lambda: &[f64]) -> Result<QSpectrum> {
    Ok(Spectrum::new(lambda.iter().map(|&x| crate::scalar::rational_from_f64(x)).collect::<Result<_>>()?))
}
