//! The six scenario operations. Each returns a JSON report, an optional CSV
//! table and the scalar metrics that assertions are checked against.

use std::f64::consts::PI;
use std::path::Path;
use std::str::FromStr;

use fhkit::fhcheck::{structural_classify, witness_search};
use fhkit::norms::{
    equal_tuning_lattice, growth_curve_partial, predicted_square_slope, taylor_orders, witness_points, EstimateOptions, Mode,
    NormCurve, SweepDirection,
};
use fhkit::oscint::{fefferman_sine, sw_sample, GridChoice};
use fhkit::qcalc::{check_homogeneity, check_positivity, check_vanishing_pattern, verify_identity_on_composite, CheckReport, QTable};
use fhkit::{corpus, Direction, PhaseFamily, TrigPoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Metrics {
    pub verdict: Option<String>,
    pub slope: Option<f64>,
    pub r2: Option<f64>,
    pub predicted_slope: Option<f64>,
    pub max: Option<f64>,
    pub all_pass: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Output {
    pub json: Value,
    pub csv: Option<String>,
    pub metrics: Metrics,
}

impl Output {
    pub fn json_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("report serialises");
        s.push('\n');
        s
    }
}

/// Multipliers given as a list, `2^a..2^b`, or comma-separated integers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NList(pub Vec<i64>);

impl FromStr for NList {
    type Err = CliError;
    fn from_str(s: &str) -> Result<NList> {
        let bad = || CliError::config("n", format!("cannot read {s:?} (use 2^a..2^b or a comma list)"));
        let s = s.trim();
        if let Some((lo, hi)) = s.split_once("..") {
            let exp = |t: &str| t.trim().strip_prefix("2^").and_then(|e| e.parse::<u32>().ok());
            let (a, b) = (exp(lo).ok_or_else(bad)?, exp(hi).ok_or_else(bad)?);
            if a > b || b > 40 {
                return Err(bad());
            }
            return Ok(NList((a..=b).map(|k| 1i64 << k).collect()));
        }
        s.split(',').map(|t| t.trim().parse::<i64>().map_err(|_| bad())).collect::<Result<_>>().map(NList)
    }
}

impl<'de> Deserialize<'de> for NList {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<i64>),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::List(v) => Ok(NList(v)),
            Raw::Text(t) => t.parse().map_err(|e: CliError| serde::de::Error::custom(e.to_string())),
        }
    }
}

fn default_grid() -> usize {
    512
}
fn default_omega_samples() -> usize {
    8
}
fn default_depth() -> u32 {
    8
}
fn default_draws() -> usize {
    50
}
fn default_max_grid_log2() -> u32 {
    fhkit::oscint::DEFAULT_MAX_GRID_LOG2
}
fn default_oversample() -> usize {
    2
}
fn default_top_k() -> usize {
    4
}
fn default_true() -> bool {
    true
}
fn default_lambda_grid() -> String {
    "log:1e2:1e7:25".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FhParams {
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_omega_samples")]
    pub omega_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Homogeneity,
    Positivity,
    Vanishing,
    Identity,
    #[default]
    All,
}

impl CheckKind {
    pub fn includes_identity(self) -> bool {
        matches!(self, CheckKind::Identity | CheckKind::All)
    }
    fn includes(self, other: CheckKind) -> bool {
        self == CheckKind::All || self == other
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QcalcParams {
    #[serde(default = "default_depth")]
    pub max_depth: u32,
    #[serde(default)]
    pub check: CheckKind,
    /// Random composites drawn for the identity check.
    #[serde(default = "default_draws")]
    pub draws: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormParams {
    pub mode: Mode,
    pub n: NList,
    pub mmax: Option<i64>,
    #[serde(default = "default_max_grid_log2")]
    pub max_grid_log2: u32,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    /// Add FH witness points of the phase to the tuning points.
    #[serde(default = "default_true")]
    pub witnesses: bool,
    /// Target direction ω for d > 1.
    pub direction: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeffParams {
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwParams {
    pub degree: usize,
    pub trials: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LatticeChoice {
    /// L₁ ≥ 100‖φ‖_{C²}, L₂ > 1000 L₁.
    Bounded,
    /// Equal tuned components at the point.
    Tuned,
    /// The lattice stored in the phase file.
    #[default]
    File,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquareParams {
    #[serde(default)]
    pub lattice: LatticeChoice,
    pub point: Option<[f64; 2]>,
    pub n: NList,
    pub mmax: Option<i64>,
    #[serde(default = "default_max_grid_log2")]
    pub max_grid_log2: u32,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
}

/// JSON family file, or a `.txt` TrigPoly in `m1 m2 a b` lines (scalar, zero lattice).
pub fn load_phase(path: &Path) -> Result<PhaseFamily> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let f = if path.extension().is_some_and(|e| e == "txt") {
        PhaseFamily::scalar(TrigPoly::from_text(&text, 2)?)?
    } else {
        PhaseFamily::from_json(&text)?
    };
    Ok(f)
}

pub fn fh_check(f: &PhaseFamily, p: &FhParams) -> Result<Output> {
    let report = witness_search(f, p.grid, p.omega_samples)?;
    let class = if f.d() == 1 { Some(structural_classify(f)?.to_string()) } else { None };
    let verdict = serde_json::to_value(report.verdict).expect("verdict serialises");
    let metrics = Metrics { verdict: verdict.as_str().map(String::from), ..Default::default() };
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "operation": "fh-check",
        "classification": class,
        "report": report,
    });
    Ok(Output { json, csv: None, metrics })
}

pub fn qcalc_verify(p: &QcalcParams, seed: Option<u64>) -> Result<Output> {
    if !(2..=10).contains(&p.max_depth) {
        return Err(CliError::config("max_depth", format!("{} outside 2..=10", p.max_depth)));
    }
    let d = p.max_depth;
    let mut t = QTable::new();
    let mut reports = Vec::new();
    let add = |kind: CheckKind, name: &str, reps: Vec<CheckReport>, reports: &mut Vec<CheckReport>| {
        if p.check.includes(kind) {
            let mut all = CheckReport::new(name);
            for r in reps {
                all.merge(r);
            }
            reports.push(all);
        }
    };
    let mut hom = Vec::new();
    let mut pos = Vec::new();
    let mut van = Vec::new();
    for k in 1..d {
        for l in 1..=d - k {
            if p.check.includes(CheckKind::Homogeneity) {
                for j in 2..=k + l {
                    hom.push(check_homogeneity(&mut t, k, l, j)?);
                }
            }
            if p.check.includes(CheckKind::Positivity) {
                for j in 2..=l + 1 {
                    pos.push(check_positivity(&mut t, k, l, j)?);
                }
            }
            if p.check.includes(CheckKind::Vanishing) {
                for mu in 0..=1 {
                    van.push(check_vanishing_pattern(&mut t, k, l, mu)?);
                }
            }
        }
    }
    add(CheckKind::Homogeneity, "homogeneity", hom, &mut reports);
    add(CheckKind::Positivity, "positivity", pos, &mut reports);
    add(CheckKind::Vanishing, "vanishing", van, &mut reports);
    if p.check.includes_identity() {
        let seed = seed.ok_or_else(|| CliError::config("seed", "the identity check draws random composites"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rep = CheckReport::new("identity");
        for _ in 0..p.draws {
            let mut f = TrigPoly::zero(1);
            for m in 1..=3 {
                f.add_term([m, 0], rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            let a = rng.random_range(-3..=3i64);
            let b = loop {
                let b = rng.random_range(-3..=3i64);
                if b != 0 {
                    break b;
                }
            };
            let k = rng.random_range(1..d);
            let l = rng.random_range(1..=d - k);
            let point = [rng.random::<f64>(), rng.random::<f64>()];
            let scale = f.compose_linear(a, b).derive((k, l))?.coeff_sum().max(1.0);
            let r = verify_identity_on_composite(&mut t, &f, a, b, k, l, point)?;
            rep.checked += 1;
            if r <= 1e-9 * scale {
                rep.passed += 1;
            } else {
                rep.violations.push(format!("f={} a={a} b={b} k={k} l={l} at {point:?}: residual {r:e}", f.to_text().trim()));
            }
        }
        reports.push(rep);
    }
    let checked: u64 = reports.iter().map(|r| r.checked).sum();
    let passed: u64 = reports.iter().map(|r| r.passed).sum();
    let violations: Vec<&String> = reports.iter().flat_map(|r| &r.violations).collect();
    let all_pass = checked == passed;
    let by_check: Vec<Value> =
        reports.iter().map(|r| json!({"check": r.check, "checked": r.checked, "passed": r.passed})).collect();
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "operation": "qcalc-verify",
        "max_depth": d,
        "seed": seed,
        "checked": checked,
        "passed": passed,
        "violations": violations,
        "by_check": by_check,
    });
    Ok(Output { json, csv: None, metrics: Metrics { all_pass: Some(all_pass), ..Default::default() } })
}

fn curve_csv(c: &NormCurve) -> String {
    let mut s = String::from("n,lambda,norm,M,N,x,y,grid,dyadic_norm\n");
    for p in &c.points {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            p.n, p.lambda, p.norm, p.m, p.n_trunc, p.x, p.y, p.grid, p.dyadic_norm
        ));
    }
    s
}

fn family_name(path: Option<&Path>) -> String {
    path.and_then(|p| p.file_stem()).map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "phase".into())
}

pub fn norm_sweep(f: &PhaseFamily, p: &NormParams, phase_path: Option<&Path>) -> Result<Output> {
    let target = p.direction.as_deref().map(Direction::normalized).transpose()?;
    let dir = SweepDirection::for_family(f, target.as_ref())?;
    let witnesses = if p.witnesses { witness_points(f, target.as_ref(), 256, 4)? } else { vec![] };
    let opts = EstimateOptions {
        grid: GridChoice::Auto { max_log2: p.max_grid_log2 },
        mmax: p.mmax,
        oversample: p.oversample,
        top_k: p.top_k,
        witnesses: witnesses.clone(),
    };
    let curve = growth_curve_partial(&family_name(phase_path), f, &p.n.0, p.mode, &dir, &opts)?;
    let direction = match &dir {
        SweepDirection::Scalar => None,
        SweepDirection::Vector(v) => Some(v.clone()),
    };
    let metrics = Metrics { slope: curve.fit.as_ref().map(|f| f.slope), r2: curve.fit.as_ref().map(|f| f.r2), ..Default::default() };
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "operation": "norm-sweep",
        "family": curve.family,
        "mode": p.mode,
        "integer_direction": direction,
        "tuning_witnesses": witnesses,
        "fit": curve.fit,
        "failures": curve.failures,
        "points": curve.points,
    });
    Ok(Output { csv: Some(curve_csv(&curve)), json, metrics })
}

/// `log:lo:hi:count`, inclusive and log-spaced.
pub fn parse_lambda_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || CliError::config("lambda_grid", format!("cannot read {s:?} (use log:lo:hi:count)"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 || parts[0] != "log" {
        return Err(bad());
    }
    let lo: f64 = parts[1].parse().map_err(|_| bad())?;
    let hi: f64 = parts[2].parse().map_err(|_| bad())?;
    let k: usize = parts[3].parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && hi <= 1e8 && k >= 2) {
        return Err(bad());
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..k).map(|i| 10f64.powf(a + (b - a) * i as f64 / (k - 1) as f64)).collect())
}

/// Least squares of y on ln x: (slope, intercept, R²).
pub fn ln_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = lx.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    (slope, icpt, if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot })
}

pub fn fefferman(p: &FeffParams) -> Result<Output> {
    let lams = parse_lambda_grid(&p.lambda_grid)?;
    let vals: Vec<f64> = lams.iter().map(|&l| fefferman_sine(l)).collect();
    let (slope, intercept, r2) = ln_fit(&lams, &vals);
    let mut csv = String::from("lambda,value\n");
    for (l, v) in lams.iter().zip(&vals) {
        csv.push_str(&format!("{l},{v}\n"));
    }
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "operation": "fefferman",
        "lambda_grid": p.lambda_grid,
        "points": lams.len(),
        "slope": slope,
        "intercept": intercept,
        "r2": r2,
        "reference_slope": PI / 2.0,
    });
    Ok(Output { json, csv: Some(csv), metrics: Metrics { slope: Some(slope), r2: Some(r2), ..Default::default() } })
}

pub fn sw_sweep(p: &SwParams, seed: Option<u64>) -> Result<Output> {
    let seed = seed.ok_or_else(|| CliError::config("seed", "sw-sweep draws random polynomials"))?;
    let best = sw_sample(p.degree, p.trials, seed)?;
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "operation": "sw-sweep",
        "degree": p.degree,
        "trials": p.trials,
        "seed": seed,
        "max": best.value,
        "argmax": {
            "trial": best.index,
            "coefficients": best.coeffs,
            "a": best.a,
            "b": best.b,
        },
    });
    Ok(Output { json, csv: None, metrics: Metrics { max: Some(best.value), ..Default::default() } })
}

pub fn square_sum(f: &PhaseFamily, p: &SquareParams, phase_path: Option<&Path>) -> Result<Output> {
    if f.d() != 1 {
        return Err(fhkit::Error::DimMismatch { expected: 1, got: f.d() }.into());
    }
    let phi = f.components[0].clone();
    let point = match p.point {
        Some([x, y]) => (x, y),
        None => *witness_points(&PhaseFamily::scalar(phi.clone())?, None, 256, 1)?
            .first()
            .ok_or_else(|| CliError::config("point", "no FH witness found; give the point explicitly"))?,
    };
    let lattice = match p.lattice {
        LatticeChoice::File => f.lattice[0],
        LatticeChoice::Bounded => corpus::bounded_square_lattice(&phi),
        LatticeChoice::Tuned => equal_tuning_lattice(&phi, point.0, point.1)?
            .ok_or_else(|| CliError::config("lattice", "gradient components at the point do not differ by an integer"))?,
    };
    let fam = PhaseFamily::new(vec![phi.clone()], vec![lattice])?;
    let (m0, n0) = taylor_orders(&phi, point.0, point.1, 12)?;
    let predicted = predicted_square_slope(m0, n0);
    let opts = EstimateOptions {
        grid: GridChoice::Auto { max_log2: p.max_grid_log2 },
        mmax: p.mmax,
        oversample: p.oversample,
        witnesses: vec![point],
        ..Default::default()
    };
    let curve = growth_curve_partial(&family_name(phase_path), &fam, &p.n.0, Mode::Sq, &SweepDirection::Scalar, &opts)?;
    let metrics = Metrics {
        slope: curve.fit.as_ref().map(|f| f.slope),
        r2: curve.fit.as_ref().map(|f| f.r2),
        predicted_slope: Some(predicted),
        ..Default::default()
    };
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "operation": "square-sum",
        "family": curve.family,
        "lattice": lattice,
        "lattice_choice": p.lattice,
        "point": [point.0, point.1],
        "m0": m0,
        "n0": n0,
        "predicted_slope": predicted,
        "fit": curve.fit,
        "failures": curve.failures,
        "points": curve.points,
    });
    Ok(Output { csv: Some(curve_csv(&curve)), json, metrics })
}
