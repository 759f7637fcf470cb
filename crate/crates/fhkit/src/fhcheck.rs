//! Grid witness search for failure of the factorisation hypothesis: a point
//! where ψ_st ≠ 0 while ψ_ss or ψ_tt vanishes.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;
use crate::trigpoly::{Direction, PhaseFamily, TrigPoly};

pub const TAU_ZERO_REL: f64 = 1e-8;
pub const TAU_ST_REL: f64 = 1e-4;
pub const MIN_GRID: usize = 64;
/// Witnesses kept in a report (largest |ψ_st| first); the total is recorded.
pub const MAX_WITNESSES: usize = 64;
const OMEGA_SEED: u64 = 0x5eed_f00d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Violated,
    NoWitnessFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessAxis {
    Ss,
    Tt,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub omega: Vec<f64>,
    pub axis: WitnessAxis,
    pub psi_st: f64,
    /// |ψ_ss| or |ψ_tt| at the refined point.
    pub residual: f64,
    pub tau_zero: f64,
    pub tau_st: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolution {
    pub grid_n: usize,
    pub spacing: f64,
    pub bisection_width: f64,
    pub omega_samples: usize,
    /// Directions implied by symmetry and not scanned (ω = −1 when d = 1).
    pub omega_skipped: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FHReport {
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub total_witnesses: usize,
    pub resolution: Resolution,
    pub tau_zero_rel: f64,
    pub tau_st_rel: f64,
}

/// Sample directions on 𝕊^{d−1}.
pub fn omega_points(d: usize, k: usize) -> Vec<Vec<f64>> {
    match d {
        0 => vec![],
        1 => vec![vec![1.0]],
        2 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..k).map(|i| {
                let th = i as f64 * golden;
                vec![th.cos(), th.sin()]
            }).collect()
        }
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..k)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / k as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let th = i as f64 * golden;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(OMEGA_SEED);
            let mut out = Vec::with_capacity(k);
            while out.len() < k {
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let r2: f64 = v.iter().map(|x| x * x).sum();
                if r2 > 1e-6 && r2 <= 1.0 {
                    let r = r2.sqrt();
                    out.push(v.into_iter().map(|x| x / r).collect());
                }
            }
            out
        }
    }
}

struct Derivs {
    ss: TrigPoly,
    tt: TrigPoly,
    st: TrigPoly,
}

impl Derivs {
    fn new(psi: &TrigPoly) -> Result<Self> {
        Ok(Derivs { ss: psi.derive((2, 0))?, tt: psi.derive((0, 2))?, st: psi.derive((1, 1))? })
    }
}

/// Search for FH-failure witnesses of ψ = ω·φ̄ over sampled directions.
pub fn witness_search(f: &PhaseFamily, grid_n: usize, omega_samples: usize) -> Result<FHReport> {
    if grid_n < MIN_GRID {
        return Err(Error::RangeError(format!("grid_n {grid_n} < {MIN_GRID}")));
    }
    let d = f.d();
    let (omegas, skipped, samples) = if d == 1 {
        (vec![vec![1.0]], vec![vec![-1.0]], 2)
    } else {
        if omega_samples == 0 {
            return Err(Error::RangeError("omega_samples must be positive".into()));
        }
        (omega_points(d, omega_samples), vec![], omega_samples)
    };
    let mut all = Vec::new();
    for om in &omegas {
        let psi = f.contract(&Direction::new(om.clone())?)?;
        all.extend(scan_direction(&psi, om, grid_n)?);
    }
    // dedupe on rounded location
    let mut uniq: BTreeMap<(WitnessAxis, i64, i64, Vec<i64>), Witness> = BTreeMap::new();
    for w in all {
        let key = (
            w.axis,
            (w.x * 1e8).round() as i64,
            (w.y * 1e8).round() as i64,
            w.omega.iter().map(|o| (o * 1e8).round() as i64).collect(),
        );
        uniq.entry(key).or_insert(w);
    }
    let mut ws: Vec<Witness> = uniq.into_values().collect();
    let total = ws.len();
    ws.sort_by(|a, b| {
        b.psi_st
            .abs()
            .total_cmp(&a.psi_st.abs())
            .then(a.x.total_cmp(&b.x))
            .then(a.y.total_cmp(&b.y))
            .then(a.axis.cmp(&b.axis))
    });
    ws.truncate(MAX_WITNESSES);
    Ok(FHReport {
        verdict: if total > 0 { Verdict::Violated } else { Verdict::NoWitnessFound },
        witnesses: ws,
        total_witnesses: total,
        resolution: Resolution {
            grid_n,
            spacing: 1.0 / grid_n as f64,
            bisection_width: 1e-10,
            omega_samples: samples,
            omega_skipped: skipped,
        },
        tau_zero_rel: TAU_ZERO_REL,
        tau_st_rel: TAU_ST_REL,
    })
}

fn scan_direction(psi: &TrigPoly, omega: &[f64], n: usize) -> Result<Vec<Witness>> {
    let dv = Derivs::new(psi)?;
    let st_scale = dv.st.coeff_sum();
    if st_scale == 0.0 {
        return Ok(vec![]);
    }
    let tau_st = TAU_ST_REL * st_scale;
    let h = 1.0 / n as f64;
    let mut out = Vec::new();
    for (axis, second) in [(WitnessAxis::Tt, &dv.tt), (WitnessAxis::Ss, &dv.ss)] {
        let tau_zero = TAU_ZERO_REL * second.coeff_sum();
        let rows: Vec<Vec<f64>> = par::map_indexed(n, |i| (0..n).map(|j| second.eval2(i as f64 * h, j as f64 * h)).collect());
        // candidate points: small nodes and bracketed sign changes along grid lines
        let found: Vec<Vec<Witness>> = par::map_indexed(n, |i| {
            let mut local = Vec::new();
            let mut accept = |x: f64, y: f64, res: f64| {
                let st = dv.st.eval2(x, y);
                if res <= tau_zero && st.abs() >= tau_st {
                    local.push(Witness {
                        x,
                        y,
                        omega: omega.to_vec(),
                        axis,
                        psi_st: st,
                        residual: res,
                        tau_zero,
                        tau_st,
                    });
                }
            };
            let xi = i as f64 * h;
            for j in 0..n {
                let v = rows[i][j];
                let yj = j as f64 * h;
                if v.abs() <= tau_zero {
                    accept(xi, yj, v.abs());
                    continue;
                }
                // along t (fixed s = x_i)
                let vt = rows[i][(j + 1) % n];
                if v * vt < 0.0 && vt.abs() > tau_zero {
                    if let Some((y, r)) = refine(|t| second.eval2(xi, t), yj, yj + h, v, tau_zero) {
                        accept(xi, y.rem_euclid(1.0), r);
                    }
                }
                // along s (fixed t = y_j)
                let vs = rows[(i + 1) % n][j];
                if v * vs < 0.0 && vs.abs() > tau_zero {
                    if let Some((x, r)) = refine(|s| second.eval2(s, yj), xi, xi + h, v, tau_zero) {
                        accept(x.rem_euclid(1.0), yj, r);
                    }
                }
            }
            local
        });
        out.extend(found.into_iter().flatten());
    }
    Ok(out)
}

/// Bisection on a bracket [a, b] with f(a) = fa; returns (root, |f(root)|)
/// once the width is ≤ 1e−10 and |f| ≤ tau, or None.
fn refine<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64, tau: f64) -> Option<(f64, f64)> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if (b - a) <= 1e-10 && fm.abs() <= tau {
            return Some((m, fm.abs()));
        }
        if fm == 0.0 {
            return Some((m, 0.0));
        }
        if m <= a || m >= b {
            break;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StructuralTag {
    Split,
    Composite,
    Product,
    Generic,
}

impl std::fmt::Display for StructuralTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StructuralTag::Split => "SPLIT",
            StructuralTag::Composite => "COMPOSITE",
            StructuralTag::Product => "PRODUCT",
            StructuralTag::Generic => "GENERIC",
        };
        f.write_str(s)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Basis index for 1, cos 2πks, sin 2πks (k ≥ 1) → 0, 2k−1, 2k.
fn basis(k: i64, sine: bool) -> usize {
    if k == 0 {
        0
    } else {
        (2 * k - 1 + sine as i64) as usize
    }
}

/// Label a scalar phase by its frequency support.
pub fn structural_classify(f: &PhaseFamily) -> Result<StructuralTag> {
    if f.d() != 1 {
        return Err(Error::DimMismatch { expected: 1, got: f.d() });
    }
    let phi = &f.components[0];
    let scale = phi.coeff_sum().max(f64::MIN_POSITIVE);
    let support: Vec<([i64; 2], (f64, f64))> = phi
        .terms()
        .filter(|(m, c)| (m[0], m[1]) != (0, 0) && (c.0.abs() + c.1.abs()) > 1e-14 * scale)
        .map(|(m, c)| (*m, *c))
        .collect();
    if support.iter().all(|(m, _)| m[0] == 0 || m[1] == 0) {
        return Ok(StructuralTag::Split);
    }
    let (m0, _) = support[0];
    let g = gcd(m0[0], m0[1]);
    let prim = [m0[0] / g, m0[1] / g];
    if support.iter().all(|(m, _)| m[0] * prim[1] - m[1] * prim[0] == 0) {
        return Ok(StructuralTag::Composite);
    }
    // coefficient matrix in the real cos/sin basis of each variable
    let kmax = phi.terms().map(|(m, _)| m[0].abs().max(m[1].abs())).max().unwrap_or(0);
    let dim = (2 * kmax + 1) as usize;
    let mut a = vec![0.0; dim * dim];
    for (m, &(ca, cb)) in phi.terms() {
        let (k, l) = (m[0], m[1]);
        let (ka, la) = (k.abs(), l.abs());
        // sign of sin(2π k s) when k < 0 (k ≥ 0 in canonical form, but be safe)
        let sk = if k < 0 { -1.0 } else { 1.0 };
        let sl = if l < 0 { -1.0 } else { 1.0 };
        let cs = |u: usize, v: usize, val: f64, a: &mut Vec<f64>| a[u * dim + v] += val;
        // cos(X+Y) = cX cY − sX sY ;  sin(X+Y) = sX cY + cX sY
        cs(basis(ka, false), basis(la, false), ca, &mut a);
        if ka > 0 && la > 0 {
            cs(basis(ka, true), basis(la, true), -ca * sk * sl, &mut a);
        }
        if ka > 0 {
            cs(basis(ka, true), basis(la, false), cb * sk, &mut a);
        }
        if la > 0 {
            cs(basis(ka, false), basis(la, true), cb * sl, &mut a);
        }
    }
    let amax = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-12 * amax * amax;
    let mut rank_one = true;
    'outer: for i in 0..dim {
        for j in 0..dim {
            for p in i + 1..dim {
                for q in j + 1..dim {
                    let minor = a[i * dim + j] * a[p * dim + q] - a[i * dim + q] * a[p * dim + j];
                    if minor.abs() > tol {
                        rank_one = false;
                        break 'outer;
                    }
                }
            }
        }
    }
    if rank_one {
        let eps = 1e-12 * amax;
        let row_nonconst = (1..dim).any(|i| (0..dim).any(|j| a[i * dim + j].abs() > eps));
        let col_nonconst = (1..dim).any(|j| (0..dim).any(|i| a[i * dim + j].abs() > eps));
        if row_nonconst && col_nonconst {
            return Ok(StructuralTag::Product);
        }
    }
    Ok(StructuralTag::Generic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn classify_corpus() {
        assert_eq!(structural_classify(&corpus::split_family()).unwrap(), StructuralTag::Split);
        assert_eq!(structural_classify(&corpus::composite_family()).unwrap(), StructuralTag::Composite);
        assert_eq!(structural_classify(&corpus::product_family()).unwrap(), StructuralTag::Product);
        assert_eq!(structural_classify(&corpus::square_divergent_family()).unwrap(), StructuralTag::Product);
        let generic = PhaseFamily::scalar(TrigPoly::from_terms(2, [([1, 1], 1.0, 0.0), ([1, 0], 0.0, 1.0), ([0, 1], 1.0, 0.0)])).unwrap();
        assert_eq!(structural_classify(&generic).unwrap(), StructuralTag::Generic);
        assert!(structural_classify(&corpus::vector_product_family()).is_err());
    }

    #[test]
    fn product_witness() {
        let r = witness_search(&corpus::product_family(), 128, 2).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        let w = r.witnesses.iter().find(|w| (w.x).abs() < 1e-6 && (w.y - 0.25).abs() < 1e-6).unwrap();
        assert!((w.psi_st + 4.0 * PI * PI).abs() < 1e-6);
        assert_eq!(r.resolution.omega_skipped, vec![vec![-1.0]]);
    }

    #[test]
    fn small_grid_rejected() {
        assert!(witness_search(&corpus::product_family(), 32, 2).is_err());
    }

    #[test]
    fn omega_points_unit() {
        for d in 2..6 {
            for w in omega_points(d, 17) {
                let n: f64 = w.iter().map(|x| x * x).sum();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }
}
