//! Quadrature building blocks: Gauss–Legendre rules, a Levin collocation
//! solver for ∫ f e^{iφ}, and an adaptive driver that picks between them.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// n-point Gauss–Legendre rule on [−1, 1] (Newton on P_n), cached.
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return r.clone();
    }
    let rule = Arc::new(compute_gauss_legendre(n));
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

fn compute_gauss_legendre(n: usize) -> GaussRule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

/// ∫_a^b f with an n-point rule.
pub fn gl_integrate<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, n: usize) -> Complex64 {
    let rule = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = Complex64::new(0.0, 0.0);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        s += f(c + h * x) * *w;
    }
    s * h
}

/// Real version of `gl_integrate`.
pub fn gl_integrate_real<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let rule = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    rule.nodes.iter().zip(&rule.weights).map(|(x, w)| f(c + h * x) * w).sum::<f64>() * h
}

/// Node-doubling Gauss–Legendre: start at `n0`, double until two successive
/// rules agree to `tol`, at most `n_max` nodes. Returns (value, |difference|).
pub fn gl_doubling<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    n0: usize,
    n_max: usize,
    tol: f64,
) -> (Complex64, f64) {
    let mut n = n0.max(4);
    let mut prev = gl_integrate(f, a, b, n);
    loop {
        let n2 = 2 * n;
        let cur = gl_integrate(f, a, b, n2);
        let diff = (cur - prev).norm();
        if diff <= tol || n2 >= n_max {
            return (cur, diff);
        }
        n = n2;
        prev = cur;
    }
}

fn solve_dense(a: &mut [Complex64], rhs: &mut [Complex64], m: usize) -> bool {
    for col in 0..m {
        let mut piv = col;
        let mut best = a[col * m + col].norm();
        for r in col + 1..m {
            let v = a[r * m + col].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return false;
        }
        if piv != col {
            for c in 0..m {
                a.swap(col * m + c, piv * m + c);
            }
            rhs.swap(col, piv);
        }
        let inv = Complex64::new(1.0, 0.0) / a[col * m + col];
        for r in col + 1..m {
            let f = a[r * m + col] * inv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in col..m {
                let v = a[col * m + c];
                a[r * m + c] -= f * v;
            }
            let v = rhs[col];
            rhs[r] -= f * v;
        }
    }
    for col in (0..m).rev() {
        let mut s = rhs[col];
        for c in col + 1..m {
            s -= a[col * m + c] * rhs[c];
        }
        rhs[col] = s / a[col * m + col];
    }
    true
}

/// Levin collocation with m Chebyshev–Lobatto points: find p with
/// p' + iφ' p = f, then ∫_a^b f e^{iφ} = p(b)e^{iφ(b)} − p(a)e^{iφ(a)}.
pub fn levin<F, P, D>(f: &F, phi: &P, dphi: &D, a: f64, b: f64, m: usize) -> Option<Complex64>
where
    F: Fn(f64) -> f64,
    P: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut mat = vec![Complex64::new(0.0, 0.0); m * m];
    let mut rhs = vec![Complex64::new(0.0, 0.0); m];
    let mut tj = vec![0.0; m];
    let mut dtj = vec![0.0; m];
    for i in 0..m {
        let x = (PI * i as f64 / (m - 1) as f64).cos();
        let t = c + h * x;
        let w = dphi(t);
        tj[0] = 1.0;
        dtj[0] = 0.0;
        if m > 1 {
            tj[1] = x;
            dtj[1] = 1.0;
        }
        for j in 2..m {
            tj[j] = 2.0 * x * tj[j - 1] - tj[j - 2];
            dtj[j] = 2.0 * tj[j - 1] + 2.0 * x * dtj[j - 1] - dtj[j - 2];
        }
        for j in 0..m {
            mat[i * m + j] = Complex64::new(dtj[j] / h, w * tj[j]);
        }
        rhs[i] = Complex64::new(f(t), 0.0);
    }
    if !solve_dense(&mut mat, &mut rhs, m) {
        return None;
    }
    let mut pb = Complex64::new(0.0, 0.0);
    let mut pa = Complex64::new(0.0, 0.0);
    for (j, cj) in rhs.iter().enumerate() {
        pb += cj;
        pa += if j % 2 == 0 { *cj } else { -cj };
    }
    let v = pb * Complex64::from_polar(1.0, phi(b)) - pa * Complex64::from_polar(1.0, phi(a));
    if v.re.is_finite() && v.im.is_finite() {
        Some(v)
    } else {
        None
    }
}

/// Phase variation (radians) up to which plain Gauss–Legendre is used.
const GL_VARIATION: f64 = 64.0;
const MAX_SPLIT_DEPTH: u32 = 48;

/// ∫_a^b f(t) e^{iφ(t)} dt for smooth f, to absolute tolerance `tol`.
/// `stationary` lists the zeros of φ' inside (a, b); between them φ is
/// monotone and the phase variation is |φ(q) − φ(p)|.
pub fn osc_integral<F, P, D>(
    f: &F,
    phi: &P,
    dphi: &D,
    a: f64,
    b: f64,
    stationary: &[f64],
    tol: f64,
) -> Result<Complex64>
where
    F: Fn(f64) -> f64,
    P: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut cuts = vec![a];
    cuts.extend(stationary.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    let total = b - a;
    let mut sum = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let t = tol * (w[1] - w[0]) / total;
        sum += monotone_piece(f, phi, dphi, w[0], w[1], t, 0)?;
    }
    Ok(sum)
}

fn monotone_piece<F, P, D>(f: &F, phi: &P, dphi: &D, p: f64, q: f64, tol: f64, depth: u32) -> Result<Complex64>
where
    F: Fn(f64) -> f64,
    P: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let var = (phi(q) - phi(p)).abs();
    let g = |t: f64| Complex64::from_polar(f(t), phi(t));
    if var <= GL_VARIATION {
        let n0 = (16.0 + var * 0.5).ceil() as usize;
        let (v, err) = gl_doubling(&g, p, q, n0.next_power_of_two(), 512, tol);
        if err <= tol {
            return Ok(v);
        }
    } else {
        let mut prev = levin(f, phi, dphi, p, q, 8);
        for m in [16usize, 32] {
            let cur = levin(f, phi, dphi, p, q, m);
            if let (Some(x), Some(y)) = (prev, cur) {
                if (x - y).norm() <= tol {
                    return Ok(y);
                }
            }
            prev = cur;
        }
    }
    if depth >= MAX_SPLIT_DEPTH || q - p < 1e-15 * q.abs().max(1.0) {
        return Err(Error::QuadratureFailed { residual: tol });
    }
    let mid = 0.5 * (p + q);
    Ok(monotone_piece(f, phi, dphi, p, mid, 0.5 * tol, depth + 1)?
        + monotone_piece(f, phi, dphi, mid, q, 0.5 * tol, depth + 1)?)
}

/// Real roots of Σ c_k x^k in the open interval (lo, hi), ascending.
pub fn poly_real_roots(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut c = c.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        let r = -c[0] / c[1];
        return if r > lo && r < hi { vec![r] } else { Vec::new() };
    }
    let dc: Vec<f64> = (1..c.len()).map(|k| k as f64 * c[k]).collect();
    let mut pts = vec![lo];
    pts.extend(poly_real_roots(&dc, lo, hi));
    pts.push(hi);
    let ev = |x: f64| c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck);
    let mut roots = Vec::new();
    for w in pts.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (mut fa, fb) = (ev(a), ev(b));
        if fa == 0.0 {
            if a > lo {
                roots.push(a);
            }
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        if fb == 0.0 {
            if b < hi {
                roots.push(b);
            }
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = ev(m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if (fm > 0.0) == (fa > 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * x.abs().max(1e-300));
    roots
}
