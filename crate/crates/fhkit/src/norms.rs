//! Rectangular and square partial-sum norm estimates of e^{2πi n⃗·ḡ} and
//! their growth in n.
//!
//! An estimate is the max of |S_{M,N}| over a candidate set of truncations
//! and a spatial grid. The candidates are a dyadic sweep plus truncations
//! tuned to resonate at the strongest grid points and at supplied witness
//! points. Tuning points are read off a fixed base grid so that the
//! candidate set does not depend on the oversampling factor.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fhcheck::witness_search;
use crate::oscint::{build_character, tune_mn, CharacterField, GridChoice, Multiplier};
use crate::trigpoly::{Direction, PhaseFamily, TrigPoly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rect,
    Sq,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "rect" => Ok(Mode::Rect),
            "sq" => Ok(Mode::Sq),
            other => Err(Error::Parse(format!("unknown mode {other:?} (rect|sq)"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Rect => "rect",
            Mode::Sq => "sq",
        })
    }
}

#[derive(Debug, Clone)]
pub struct EstimateOptions {
    pub grid: GridChoice,
    /// Largest truncation considered; defaults to the smallest order whose
    /// window covers the whole stored band on both axes.
    pub mmax: Option<i64>,
    /// Spatial samples per window frequency (power of two).
    pub oversample: usize,
    /// Grid maxima used as tuning points.
    pub top_k: usize,
    /// Extra tuning points, also evaluated exactly for every tuned pair.
    pub witnesses: Vec<(f64, f64)>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions { grid: GridChoice::default(), mmax: None, oversample: 2, top_k: 4, witnesses: vec![] }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Estimate {
    pub norm: f64,
    pub trunc: (i64, i64),
    pub point: (f64, f64),
    /// Max over the dyadic sweep alone.
    pub dyadic_norm: f64,
    pub grid: usize,
    pub mmax: i64,
    pub pairs: usize,
}

#[derive(Debug, Clone, Copy)]
struct PairEval {
    sup: f64,
    argmax: (f64, f64),
    base_sup: f64,
    base_argmax: (f64, f64),
}

const MIN_SPATIAL: usize = 32;

type WindowKey = (Option<(i64, i64)>, Option<(i64, i64)>);

struct Evaluator<'a> {
    field: &'a CharacterField,
    oversample: usize,
    cache: HashMap<WindowKey, PairEval>,
}

impl<'a> Evaluator<'a> {
    fn spatial(&self, width: usize, os: usize) -> usize {
        let g = self.field.grid;
        (os * width).next_power_of_two().clamp(MIN_SPATIAL.min(g), g)
    }

    fn eval(&mut self, m: i64, n: i64) -> Result<PairEval> {
        let key = (self.field.overlap(0, m), self.field.overlap(1, n));
        if let Some(e) = self.cache.get(&key) {
            return Ok(*e);
        }
        let w = self.field.window_width(m, n);
        let zero = PairEval { sup: 0.0, argmax: (0.0, 0.0), base_sup: 0.0, base_argmax: (0.0, 0.0) };
        let e = if w[0] == 0 || w[1] == 0 {
            zero
        } else {
            let (px, py) = (self.spatial(w[0], self.oversample), self.spatial(w[1], self.oversample));
            let (bx, by) = (self.spatial(w[0], 2).min(px), self.spatial(w[1], 2).min(py));
            let (sx, sy) = (px / bx, py / by);
            let buf = self.field.synthesize(m, n, px, py)?.expect("nonempty window");
            let mut e = zero;
            for i in 0..px {
                for j in 0..py {
                    let v = buf[i * py + j].norm();
                    let pt = (i as f64 / px as f64, j as f64 / py as f64);
                    if v > e.sup {
                        e.sup = v;
                        e.argmax = pt;
                    }
                    if i % sx == 0 && j % sy == 0 && v > e.base_sup {
                        e.base_sup = v;
                        e.base_argmax = pt;
                    }
                }
            }
            e
        };
        self.cache.insert(key, e);
        Ok(e)
    }
}

fn dyadic(limit: i64) -> Vec<i64> {
    let mut v = vec![];
    let mut p = 1i64;
    while p < limit {
        v.push(p);
        p *= 2;
    }
    v.push(limit);
    v
}

struct Best {
    norm: f64,
    trunc: (i64, i64),
    point: (f64, f64),
}

impl Best {
    fn offer(&mut self, v: f64, trunc: (i64, i64), point: (f64, f64)) {
        if v > self.norm {
            self.norm = v;
            self.trunc = trunc;
            self.point = point;
        }
    }
}

/// Shared core of the rectangular and square estimators.
fn estimate(f: &PhaseFamily, field: &CharacterField, mode: Mode, opts: &EstimateOptions) -> Result<Estimate> {
    if !opts.oversample.is_power_of_two() || opts.oversample < 1 {
        return Err(Error::RangeError(format!("oversample {} is not a power of two", opts.oversample)));
    }
    let full = field.max_order();
    let field_max = full[0].max(full[1]) - 1;
    let mmax = opts.mmax.unwrap_or(field_max);
    if mmax < 0 {
        return Err(Error::RangeError(format!("mmax {mmax} < 0")));
    }
    let mut ev = Evaluator { field, oversample: opts.oversample, cache: HashMap::new() };

    // tuning points from the full dyadic sweep (independent of mmax)
    let sweep = dyadic(field_max.max(1));
    let mut base: Vec<(f64, (f64, f64))> = Vec::new();
    for &m in &sweep {
        for &n in &sweep {
            let e = ev.eval(m, n)?;
            if e.base_sup > 0.0 {
                base.push((e.base_sup, e.base_argmax));
            }
        }
    }
    base.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1 .0.total_cmp(&b.1 .0)).then(a.1 .1.total_cmp(&b.1 .1)));
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (_, p) in base {
        if points.len() >= opts.top_k {
            break;
        }
        if !points.contains(&p) {
            points.push(p);
        }
    }
    points.extend(opts.witnesses.iter().copied());

    let mut best = Best { norm: 0.0, trunc: (0, 0), point: (0.0, 0.0) };
    let cand = dyadic(mmax.max(1)).into_iter().filter(|&m| m <= mmax).collect::<Vec<_>>();
    let cand = if mmax == 0 { vec![0] } else { cand };
    let mut dyadic_pairs = BTreeSet::new();
    for &m in &cand {
        match mode {
            Mode::Rect => {
                for &n in &cand {
                    dyadic_pairs.insert((m, n));
                }
            }
            Mode::Sq => {
                dyadic_pairs.insert((m, m));
            }
        }
    }
    for &(m, n) in &dyadic_pairs {
        let e = ev.eval(m, n)?;
        best.offer(e.sup, (m, n), e.argmax);
    }
    let dyadic_norm = best.norm;

    let mut tuned = BTreeSet::new();
    if field.lambda > 0.0 {
        let omega = Direction::new(field.omega.clone())?;
        for &(x, y) in &points {
            let (ms, ns) = tune_mn(f, field.lambda, x, y, &omega)?;
            if mode == Mode::Rect {
                tuned.insert((ms, ns));
            }
            tuned.insert((ms, ms));
            tuned.insert((ns, ns));
        }
    } else {
        tuned.insert((0, 0));
    }
    tuned.retain(|&(m, n)| m <= mmax && n <= mmax);
    for &(m, n) in &tuned {
        let e = ev.eval(m, n)?;
        best.offer(e.sup, (m, n), e.argmax);
        for &(x, y) in &opts.witnesses {
            let v = field.partial_sum_at(m, n, x, y)?;
            best.offer(v, (m, n), (x, y));
        }
    }
    Ok(Estimate {
        norm: best.norm,
        trunc: best.trunc,
        point: best.point,
        dyadic_norm,
        grid: field.grid,
        mmax,
        pairs: dyadic_pairs.len() + tuned.len(),
    })
}

/// sup over candidate (M, N) of ‖S_{M,N} e^{2πi n⃗·ḡ}‖_∞.
pub fn urect_estimate(f: &PhaseFamily, n: impl Into<Multiplier>, opts: &EstimateOptions) -> Result<Estimate> {
    let field = build_character(f, n, opts.grid)?;
    estimate(f, &field, Mode::Rect, opts)
}

/// sup over candidate N of ‖S_{N,N} e^{2πi n⃗·ḡ}‖_∞.
pub fn usq_estimate(f: &PhaseFamily, n: impl Into<Multiplier>, opts: &EstimateOptions) -> Result<Estimate> {
    let field = build_character(f, n, opts.grid)?;
    estimate(f, &field, Mode::Sq, opts)
}

/// Both estimates from one transform.
pub fn estimates(f: &PhaseFamily, n: impl Into<Multiplier>, opts: &EstimateOptions) -> Result<(Estimate, Estimate)> {
    let field = build_character(f, n, opts.grid)?;
    Ok((estimate(f, &field, Mode::Rect, opts)?, estimate(f, &field, Mode::Sq, opts)?))
}

pub fn estimate_mode(f: &PhaseFamily, n: impl Into<Multiplier>, mode: Mode, opts: &EstimateOptions) -> Result<Estimate> {
    match mode {
        Mode::Rect => urect_estimate(f, n, opts),
        Mode::Sq => usq_estimate(f, n, opts),
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CurvePoint {
    pub n: i64,
    pub lambda: f64,
    pub norm: f64,
    pub m: i64,
    pub n_trunc: i64,
    pub x: f64,
    pub y: f64,
    pub grid: usize,
    pub dyadic_norm: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub window: (i64, i64),
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct NormCurve {
    pub family: String,
    pub mode: Mode,
    pub points: Vec<CurvePoint>,
    pub fit: Option<Fit>,
    /// Multipliers whose estimate failed, with the error.
    pub failures: Vec<(i64, String)>,
}

/// Least squares of y on ln n over the upper half of the points.
pub fn fit_log(points: &[(i64, f64)]) -> Option<Fit> {
    if points.len() < 2 {
        return None;
    }
    let upper = &points[points.len() / 2..];
    let upper = if upper.len() < 2 { &points[points.len() - 2..] } else { upper };
    let xs: Vec<f64> = upper.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = upper.iter().map(|p| p.1).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(Fit { slope, intercept, r2, window: (upper[0].0, upper[upper.len() - 1].0) })
}

/// Direction-dependent multiplier for sweeps: n itself when d = 1,
/// n·v for the integer vector v best aligned with `target` otherwise.
#[derive(Debug, Clone)]
pub enum SweepDirection {
    Scalar,
    Vector(Vec<i64>),
}

impl SweepDirection {
    pub fn for_family(f: &PhaseFamily, target: Option<&Direction>) -> Result<SweepDirection> {
        if f.d() == 1 {
            return Ok(SweepDirection::Scalar);
        }
        let target = target.ok_or_else(|| Error::RangeError("d > 1 needs a target direction".into()))?;
        if target.dim() != f.d() {
            return Err(Error::DimMismatch { expected: f.d(), got: target.dim() });
        }
        Ok(SweepDirection::Vector(best_integer_direction(target.as_slice(), default_radius(f.d()))))
    }

    pub fn multiplier(&self, n: i64) -> Multiplier {
        match self {
            SweepDirection::Scalar => Multiplier::Scalar(n),
            SweepDirection::Vector(v) => Multiplier::Vector(v.iter().map(|x| x * n).collect()),
        }
    }
}

/// Search radius keeping the brute-force ball near 1e7 lattice points.
pub fn default_radius(d: usize) -> i64 {
    if d <= 2 {
        return 1000;
    }
    let r = ((1e7f64).powf(1.0 / d as f64) - 1.0) / 2.0;
    (r.floor() as i64).max(1)
}

/// Integer vector v, 0 < ‖v‖∞ ≤ radius, minimising the distance from v to
/// the ray through ω; ties go to the shorter vector.
pub fn best_integer_direction(omega: &[f64], radius: i64) -> Vec<i64> {
    let d = omega.len();
    let mut best: Option<(f64, f64, Vec<i64>)> = None;
    let mut v = vec![-radius; d];
    loop {
        let dot: f64 = v.iter().zip(omega).map(|(&a, &b)| a as f64 * b).sum();
        if dot > 0.0 {
            let n2: f64 = v.iter().map(|&a| (a * a) as f64).sum();
            let dist2 = (n2 - dot * dot).max(0.0);
            let better = match &best {
                None => true,
                Some((bd, bn, _)) => dist2 < *bd - 1e-12 || (dist2 <= *bd + 1e-12 && n2 < *bn),
            };
            if better {
                best = Some((dist2, n2, v.clone()));
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                return best.map(|b| b.2).unwrap_or_else(|| vec![0; d]);
            }
            v[i] += 1;
            if v[i] <= radius {
                break;
            }
            v[i] = -radius;
            i += 1;
        }
    }
}

fn curve_inner(
    family: &str,
    f: &PhaseFamily,
    n_list: &[i64],
    mode: Mode,
    dir: &SweepDirection,
    opts: &EstimateOptions,
    strict: bool,
) -> Result<NormCurve> {
    if n_list.len() < 4 {
        return Err(Error::RangeError(format!("need at least 4 multipliers, got {}", n_list.len())));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] < 1 {
        return Err(Error::RangeError("multipliers must be positive and strictly ascending".into()));
    }
    let mut points = Vec::new();
    let mut failures = Vec::new();
    // sequential: each transform can take a large share of memory
    for &n in n_list {
        let mult = dir.multiplier(n);
        let lambda = match &mult {
            Multiplier::Scalar(x) => x.abs() as f64,
            Multiplier::Vector(v) => v.iter().map(|&a| (a * a) as f64).sum::<f64>().sqrt(),
        };
        match estimate_mode(f, mult, mode, opts) {
            Ok(e) => points.push(CurvePoint {
                n,
                lambda,
                norm: e.norm,
                m: e.trunc.0,
                n_trunc: e.trunc.1,
                x: e.point.0,
                y: e.point.1,
                grid: e.grid,
                dyadic_norm: e.dyadic_norm,
            }),
            Err(e) if !strict => failures.push((n, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    let fit = if failures.is_empty() {
        fit_log(&points.iter().map(|p| (p.n, p.norm)).collect::<Vec<_>>())
    } else {
        None
    };
    Ok(NormCurve { family: family.to_string(), mode, points, fit, failures })
}

/// Norm estimates over `n_list` with a log fit on the upper half.
pub fn growth_curve(family: &str, f: &PhaseFamily, n_list: &[i64], mode: Mode, dir: &SweepDirection, opts: &EstimateOptions) -> Result<NormCurve> {
    curve_inner(family, f, n_list, mode, dir, opts, true)
}

/// As `growth_curve`, recording per-n failures instead of stopping; the fit
/// is only reported when every n succeeded.
pub fn growth_curve_partial(
    family: &str,
    f: &PhaseFamily,
    n_list: &[i64],
    mode: Mode,
    dir: &SweepDirection,
    opts: &EstimateOptions,
) -> Result<NormCurve> {
    curve_inner(family, f, n_list, mode, dir, opts, false)
}

/// Up to `limit` FH witness locations of the scalar phase along ω.
pub fn witness_points(f: &PhaseFamily, omega: Option<&Direction>, grid_n: usize, limit: usize) -> Result<Vec<(f64, f64)>> {
    let scalar = match omega {
        Some(w) => PhaseFamily::scalar(f.contract(w)?)?,
        None if f.d() == 1 => PhaseFamily::scalar(f.components[0].clone())?,
        None => return Err(Error::RangeError("d > 1 needs a direction".into())),
    };
    let report = witness_search(&scalar, grid_n, 1)?;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for w in report.witnesses {
        if out.len() >= limit {
            break;
        }
        if !out.contains(&(w.x, w.y)) {
            out.push((w.x, w.y));
        }
    }
    Ok(out)
}

/// Minimal m ≥ 3 with ∂_t^m φ ≠ 0 and minimal n ≥ 2 with ∂_s^n φ ≠ 0 at
/// (x, y); None stands for infinity (nothing found up to order `limit`).
pub fn taylor_orders(phi: &TrigPoly, x: f64, y: f64, limit: u32) -> Result<(Option<u32>, Option<u32>)> {
    let first = |lo: u32, axis: usize| -> Result<Option<u32>> {
        for k in lo..=limit {
            let order = if axis == 0 { (k, 0) } else { (0, k) };
            let d = phi.derive(order)?;
            let scale = d.coeff_sum();
            if scale > 0.0 && d.eval2(x, y).abs() > 1e-9 * scale {
                return Ok(Some(k));
            }
        }
        Ok(None)
    };
    Ok((first(3, 1)?, first(2, 0)?))
}

/// Growth rate (π/2)(1 − 1/n₀ − 1/m₀) of the resonant square-sum integral.
pub fn predicted_square_slope(m0: Option<u32>, n0: Option<u32>) -> f64 {
    let inv = |v: Option<u32>| v.map_or(0.0, |k| 1.0 / k as f64);
    0.5 * PI * (1.0 - inv(n0) - inv(m0))
}

/// Lattice (L₁, L₂) with φ_s + L₁ = φ_t + L₂ at (x, y), or None when the
/// gradient components do not differ by an integer.
pub fn equal_tuning_lattice(phi: &TrigPoly, x: f64, y: f64) -> Result<Option<[i64; 2]>> {
    let gs = phi.derive((1, 0))?.eval2(x, y);
    let gt = phi.derive((0, 1))?.eval2(x, y);
    let diff = gs - gt;
    if (diff - diff.round()).abs() > 1e-9 * (1.0 + gs.abs()) {
        return Ok(None);
    }
    let l1 = 1i64;
    let l2 = l1 + diff.round() as i64;
    if (gs + l1 as f64).abs() < 1e-9 {
        return Ok(Some([l1 + 1, l2 + 1]));
    }
    Ok(Some([l1, l2]))
}
