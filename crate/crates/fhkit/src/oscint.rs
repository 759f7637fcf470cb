//! Dirichlet partial sums of characters e^{2πi n⃗·ḡ} and principal-value
//! oscillatory integrals against 1/t.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftDirection;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft2::{fft2, index_of_freq, signed_freq};
use crate::par;
use crate::quad::{gl_doubling, gl_integrate_real, osc_integral, poly_real_roots};
use crate::special::{aux_fg, si};
use crate::trigpoly::{Direction, PhaseFamily, TrigPoly};

/// D_N(t) = sin(2π(N+½)t) / sin(πt), equal to 2N+1 at integers.
pub fn dirichlet(n: u64, t: f64) -> f64 {
    let r = t - t.round();
    let k = (2 * n + 1) as f64;
    if r.abs() < 1e-8 {
        // (2N+1)(1 − π² r² ((2N+1)² − 1)/6) + O(r⁴)
        return k * (1.0 - PI * PI * r * r * (k * k - 1.0) / 6.0);
    }
    let x = k * r * 0.5; // (N+½) r, reduced mod 1 before scaling
    let num = (2.0 * PI * (x - x.round())).sin();
    num / (PI * r).sin()
}

/// Alias-guard threshold on the ℓ¹ coefficient mass in the outer 10% band.
pub const ALIAS_TAIL_LIMIT: f64 = 1e-8;
/// Default cap on the transform size: G² complex values must fit in memory.
pub const DEFAULT_MAX_GRID_LOG2: u32 = 13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridChoice {
    Fixed(usize),
    /// Start from a bandwidth estimate and double up to 2^max_log2.
    Auto { max_log2: u32 },
}

impl Default for GridChoice {
    fn default() -> Self {
        GridChoice::Auto { max_log2: DEFAULT_MAX_GRID_LOG2 }
    }
}

/// Frequency multiplier: an integer for d = 1, a lattice vector n⃗ otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Multiplier {
    Scalar(i64),
    Vector(Vec<i64>),
}

impl Multiplier {
    fn as_vec(&self, d: usize) -> Result<Vec<i64>> {
        match self {
            Multiplier::Scalar(n) if d == 1 => Ok(vec![*n]),
            Multiplier::Scalar(_) => Err(Error::DimMismatch { expected: d, got: 1 }),
            Multiplier::Vector(v) if v.len() == d => Ok(v.clone()),
            Multiplier::Vector(v) => Err(Error::DimMismatch { expected: d, got: v.len() }),
        }
    }
}

impl From<i64> for Multiplier {
    fn from(n: i64) -> Self {
        Multiplier::Scalar(n)
    }
}

/// Fourier coefficients of g = e^{2πi n⃗·ḡ}. Only the periodic part
/// e^{2πi n⃗·φ̄} is transformed; the lattice part is an exact index shift.
#[derive(Debug, Clone)]
pub struct CharacterField {
    pub n_vec: Vec<i64>,
    pub lambda: f64,
    pub omega: Vec<f64>,
    pub grid: usize,
    /// (n⃗·L⃗₁, n⃗·L⃗₂): coefficient of g at (k, l) is ĉ(k − shift₀, l − shift₁).
    pub shift: [i64; 2],
    /// n⃗·φ̄, the periodic phase in cycles.
    pub phase: TrigPoly,
    pub tail_mass: f64,
    pub parseval_error: f64,
    pub unimodularity_error: f64,
    coeffs: Vec<Complex64>,
}

/// Bandwidth (cycles) of e^{2πi p} along each axis: sup |∂ p|.
fn bandwidth(p: &TrigPoly) -> [f64; 2] {
    [2.0 * PI * p.freq_weighted_sum(0), 2.0 * PI * p.freq_weighted_sum(1)]
}

pub fn build_character(f: &PhaseFamily, n: impl Into<Multiplier>, grid: GridChoice) -> Result<CharacterField> {
    let n_vec = n.into().as_vec(f.d())?;
    let w: Vec<f64> = n_vec.iter().map(|&x| x as f64).collect();
    let phase = f.weighted_sum(&w)?;
    let mut shift = [0i64; 2];
    for (row, &nj) in f.lattice.iter().zip(&n_vec) {
        shift[0] += nj * row[0];
        shift[1] += nj * row[1];
    }
    let lambda = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let omega = if lambda > 0.0 { w.iter().map(|x| x / lambda).collect() } else { vec![0.0; w.len()] };
    let bw = bandwidth(&phase);
    let b = bw[0].max(bw[1]);
    let (mut g, max_g) = match grid {
        GridChoice::Fixed(g) => {
            if !g.is_power_of_two() || g < 4 {
                return Err(Error::RangeError(format!("grid {g} is not a power of two ≥ 4")));
            }
            (g, g)
        }
        GridChoice::Auto { max_log2 } => {
            let want = 2.0 * (b + 6.0 * b.cbrt() + 20.0) / 0.9;
            let g0 = (want.ceil() as usize).max(64).next_power_of_two();
            let cap = 1usize << max_log2;
            (g0.min(cap), cap)
        }
    };
    loop {
        let field = transform(&phase, g)?;
        let (coeffs, tail, parseval, unimod) = field;
        if tail <= ALIAS_TAIL_LIMIT {
            return Ok(CharacterField {
                n_vec,
                lambda,
                omega,
                grid: g,
                shift,
                phase,
                tail_mass: tail,
                parseval_error: parseval,
                unimodularity_error: unimod,
                coeffs,
            });
        }
        if g >= max_g {
            return Err(Error::AliasGuardFailed { grid: g, tail });
        }
        g *= 2;
    }
}

type Transformed = (Vec<Complex64>, f64, f64, f64);

fn transform(phase: &TrigPoly, g: usize) -> Result<Transformed> {
    let gg = g.checked_mul(g).ok_or_else(|| Error::RangeError("grid too large".into()))?;
    let twiddle: Vec<Complex64> = (0..g).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / g as f64)).collect();
    let terms: Vec<([i64; 2], Complex64, f64)> = phase
        .terms()
        .map(|(m, &(a, b))| {
            if m[0] == 0 && m[1] == 0 {
                (*m, Complex64::new(0.0, 0.0), a)
            } else {
                (*m, Complex64::new(a, -b), 0.0)
            }
        })
        .collect();
    let constant: f64 = terms.iter().map(|t| t.2).sum();
    let mut buf = vec![Complex64::new(0.0, 0.0); gg];
    par::for_each_chunk_mut(&mut buf, g, |i, row| {
        for (j, out) in row.iter_mut().enumerate() {
            let mut p = constant;
            for (m, c, _) in &terms {
                let idx = (m[0] * i as i64 + m[1] * j as i64).rem_euclid(g as i64) as usize;
                let e = twiddle[idx];
                p += c.re * e.re - c.im * e.im;
            }
            let frac = p - p.round();
            *out = Complex64::from_polar(1.0, 2.0 * PI * frac);
        }
    });
    let unimod = buf.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    fft2(&mut buf, g, g, FftDirection::Forward);
    let scale = 1.0 / gg as f64;
    for z in buf.iter_mut() {
        *z *= scale;
    }
    let edge = (0.45 * g as f64).floor() as i64;
    let mut energy = 0.0;
    let mut tail = 0.0;
    for i in 0..g {
        let k = signed_freq(i, g).abs();
        for j in 0..g {
            let z = buf[i * g + j];
            energy += z.norm_sqr();
            if k > edge || signed_freq(j, g).abs() > edge {
                tail += z.norm();
            }
        }
    }
    Ok((buf, tail, (energy - 1.0).abs(), unimod))
}

/// |S_{M,N}| sampled on a px × py grid of [0,1)².
#[derive(Debug, Clone, Serialize)]
pub struct PartialSumGrid {
    pub m: i64,
    pub n: i64,
    pub px: usize,
    pub py: usize,
    pub sup: f64,
    pub argmax: (f64, f64),
    #[serde(skip)]
    pub values: Option<Vec<f64>>,
}

impl CharacterField {
    /// ĉ_g(k, l), zero outside the stored band.
    pub fn coeff(&self, k: i64, l: i64) -> Complex64 {
        let (kp, lp) = (k - self.shift[0], l - self.shift[1]);
        let h = (self.grid / 2) as i64;
        if kp < -h || kp >= h || lp < -h || lp >= h {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[index_of_freq(kp, self.grid) * self.grid + index_of_freq(lp, self.grid)]
    }

    /// Smallest truncation order per axis whose window covers the whole stored band.
    pub fn max_order(&self) -> [i64; 2] {
        let h = (self.grid / 2) as i64;
        [self.shift[0].abs() + h, self.shift[1].abs() + h]
    }

    // Orders past `max_order` are allowed: the alias guard certifies that the
    // stored band carries all the mass, so such windows give the full sum.
    fn check_orders(&self, m: i64, n: i64) -> Result<()> {
        if m < 0 || n < 0 {
            return Err(Error::RangeError(format!("negative truncation ({m}, {n})")));
        }
        Ok(())
    }

    /// Stored periodic-part index range hit by the window |k| ≤ m on one axis.
    pub fn overlap(&self, axis: usize, m: i64) -> Option<(i64, i64)> {
        let h = (self.grid / 2) as i64;
        let lo = (-m - self.shift[axis]).max(-h);
        let hi = (m - self.shift[axis]).min(h - 1);
        (lo <= hi).then_some((lo, hi))
    }

    /// Width of the window's overlap with the stored band on each axis.
    pub fn window_width(&self, m: i64, n: i64) -> [usize; 2] {
        let w = |axis, o| self.overlap(axis, o).map(|(a, b)| (b - a + 1) as usize).unwrap_or(0);
        [w(0, m), w(1, n)]
    }

    /// Values of S_{M,N} times a unimodular character on a px × py grid,
    /// or None when the window misses the stored band.
    pub fn synthesize(&self, m: i64, n: i64, px: usize, py: usize) -> Result<Option<Vec<Complex64>>> {
        self.check_orders(m, n)?;
        if !px.is_power_of_two() || !py.is_power_of_two() {
            return Err(Error::RangeError(format!("grid {px}×{py} is not a power of two")));
        }
        let (ko, lo) = match (self.overlap(0, m), self.overlap(1, n)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Ok(None),
        };
        let g = self.grid;
        let mut buf = vec![Complex64::new(0.0, 0.0); px * py];
        for k in ko.0..=ko.1 {
            let src = index_of_freq(k, g) * g;
            let dst = index_of_freq(k, px) * py;
            for l in lo.0..=lo.1 {
                buf[dst + index_of_freq(l, py)] += self.coeffs[src + index_of_freq(l, g)];
            }
        }
        fft2(&mut buf, px, py, FftDirection::Inverse);
        Ok(Some(buf))
    }

    /// |S_{M,N}| sampled on a px × py grid. The lattice shift multiplies S by
    /// a unimodular character and does not change the modulus.
    pub fn partial_sum_on_grid(&self, m: i64, n: i64, px: usize, py: usize, keep: bool) -> Result<PartialSumGrid> {
        let Some(buf) = self.synthesize(m, n, px, py)? else {
            return Ok(PartialSumGrid {
                m,
                n,
                px,
                py,
                sup: 0.0,
                argmax: (0.0, 0.0),
                values: keep.then(|| vec![0.0; px * py]),
            });
        };
        let mut sup = 0.0;
        let mut arg = 0usize;
        for (i, z) in buf.iter().enumerate() {
            let v = z.norm();
            if v > sup {
                sup = v;
                arg = i;
            }
        }
        let argmax = ((arg / py) as f64 / px as f64, (arg % py) as f64 / py as f64);
        let values = keep.then(|| buf.iter().map(|z| z.norm()).collect());
        Ok(PartialSumGrid { m, n, px, py, sup, argmax, values })
    }

    /// S_{M,N} on the transform's own G × G spatial grid.
    pub fn partial_sum_sup(&self, m: i64, n: i64) -> Result<PartialSumGrid> {
        self.partial_sum_on_grid(m, n, self.grid, self.grid, false)
    }

    /// |S_{M,N} g(x, y)| at an arbitrary point.
    pub fn partial_sum_at(&self, m: i64, n: i64, x: f64, y: f64) -> Result<f64> {
        self.check_orders(m, n)?;
        let (ko, lo) = match (self.overlap(0, m), self.overlap(1, n)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Ok(0.0),
        };
        let g = self.grid;
        let ey: Vec<Complex64> =
            (lo.0..=lo.1).map(|l| Complex64::from_polar(1.0, 2.0 * PI * frac(l as f64 * y))).collect();
        let mut total = Complex64::new(0.0, 0.0);
        for k in ko.0..=ko.1 {
            let src = index_of_freq(k, g) * g;
            let mut inner = Complex64::new(0.0, 0.0);
            for (l, e) in (lo.0..=lo.1).zip(&ey) {
                inner += self.coeffs[src + index_of_freq(l, g)] * e;
            }
            total += inner * Complex64::from_polar(1.0, 2.0 * PI * frac(k as f64 * x));
        }
        Ok(total.norm())
    }

    /// Value of the transformed function at a grid node, from the phase.
    pub fn sample(&self, x: f64, y: f64) -> Complex64 {
        let p = self.phase.eval2(x, y);
        Complex64::from_polar(1.0, 2.0 * PI * frac(p))
    }

    /// Σ |ĉ|².
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }
}

#[inline]
fn frac(x: f64) -> f64 {
    x - x.round()
}

/// Resonant truncation orders M* = round|λ(∂_sψ + ω·L⃗₁)|, N* likewise.
pub fn tune_mn(f: &PhaseFamily, lambda: f64, x: f64, y: f64, omega: &Direction) -> Result<(i64, i64)> {
    let psi = f.contract(omega)?;
    let lat = f.lattice_dot(omega.as_slice());
    let gs = psi.derive((1, 0))?.eval2(x, y) + lat[0];
    let gt = psi.derive((0, 1))?.eval2(x, y) + lat[1];
    Ok(((lambda * gs).abs().round() as i64, (lambda * gt).abs().round() as i64))
}

/// `tune_mn` for a scalar family with integer multiplier n.
pub fn tune_mn_scalar(f: &PhaseFamily, n: i64, x: f64, y: f64) -> Result<(i64, i64)> {
    tune_mn(f, n as f64, x, y, &Direction::new(vec![1.0])?)
}

/// Real phase φ(t) in radians for ∫ e^{iφ(t)} F(t) dt/t.
pub trait OscPhase: Sync {
    fn phase(&self, t: f64) -> f64;
    fn dphase(&self, t: f64) -> f64;
    /// Upper bound on |φ'| over [−r, r].
    fn dphase_bound(&self, r: f64) -> f64;
    /// Zeros of t ↦ d/dt φ(σt) in (lo, hi) for σ = ±1.
    fn stationary_points(&self, sigma: f64, lo: f64, hi: f64) -> Vec<f64>;
    fn odd_part(&self, t: f64) -> f64 {
        0.5 * (self.phase(t) - self.phase(-t))
    }
    fn even_part(&self, t: f64) -> f64 {
        0.5 * (self.phase(t) + self.phase(-t))
    }
}

/// φ(t) = 2π[λ ψ(x + t) + ρ t] for a 1-D section ψ.
#[derive(Debug, Clone)]
pub struct SectionPhase {
    pub lambda: f64,
    pub rho: f64,
    pub x: f64,
    section: TrigPoly,
    dsection: TrigPoly,
    slope_bound: f64,
}

impl SectionPhase {
    pub fn new(section: TrigPoly, lambda: f64, rho: f64, x: f64) -> Result<Self> {
        if section.dim() != 1 {
            return Err(Error::DimMismatch { expected: 1, got: section.dim() });
        }
        let dsection = section.derive((1, 0))?;
        let slope_bound = dsection.coeff_sum();
        Ok(SectionPhase { lambda, rho, x, section, dsection, slope_bound })
    }
}

impl OscPhase for SectionPhase {
    fn phase(&self, t: f64) -> f64 {
        2.0 * PI * (self.lambda * self.section.eval(&[self.x + t]) + self.rho * t)
    }
    fn dphase(&self, t: f64) -> f64 {
        2.0 * PI * (self.lambda * self.dsection.eval(&[self.x + t]) + self.rho)
    }
    fn dphase_bound(&self, _r: f64) -> f64 {
        2.0 * PI * (self.lambda.abs() * self.slope_bound + self.rho.abs())
    }
    fn stationary_points(&self, sigma: f64, lo: f64, hi: f64) -> Vec<f64> {
        let g = |t: f64| self.dphase(sigma * t);
        let freq = self.section.max_freq().max(1) as f64;
        let n = ((hi - lo) * freq * 32.0).ceil().max(16.0) as usize;
        let h = (hi - lo) / n as f64;
        let mut out = Vec::new();
        let mut a = lo;
        let mut ga = g(a);
        for i in 1..=n {
            let b = lo + i as f64 * h;
            let gb = g(b);
            if ga * gb < 0.0 {
                let (mut l, mut r, mut gl) = (a, b, ga);
                for _ in 0..80 {
                    let m = 0.5 * (l + r);
                    let gm = g(m);
                    if (gm > 0.0) == (gl > 0.0) {
                        l = m;
                        gl = gm;
                    } else {
                        r = m;
                    }
                }
                out.push(0.5 * (l + r));
            }
            a = b;
            ga = gb;
        }
        out
    }
}

/// φ(t) = Σ c_k t^k (radians, no 2π).
#[derive(Debug, Clone)]
pub struct PolyPhase {
    pub coeffs: Vec<f64>,
}

impl PolyPhase {
    fn horner(c: &[f64], t: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
    }
}

impl OscPhase for PolyPhase {
    fn phase(&self, t: f64) -> f64 {
        Self::horner(&self.coeffs, t)
    }
    fn dphase(&self, t: f64) -> f64 {
        let mut s = 0.0;
        for k in (1..self.coeffs.len()).rev() {
            s = s * t + k as f64 * self.coeffs[k];
        }
        s
    }
    fn dphase_bound(&self, r: f64) -> f64 {
        (1..self.coeffs.len()).map(|k| k as f64 * self.coeffs[k].abs() * r.powi(k as i32 - 1)).sum()
    }
    fn stationary_points(&self, sigma: f64, lo: f64, hi: f64) -> Vec<f64> {
        // d/dt P(σt) = Σ k c_k σ^k t^{k−1}
        let d: Vec<f64> = (1..self.coeffs.len())
            .map(|k| k as f64 * self.coeffs[k] * if k % 2 == 1 { sigma } else { 1.0 })
            .collect();
        poly_real_roots(&d, lo, hi)
    }
    fn odd_part(&self, t: f64) -> f64 {
        let mut s = 0.0;
        for k in (1..self.coeffs.len()).rev() {
            s = s * t + if k % 2 == 1 { self.coeffs[k] } else { 0.0 };
        }
        s * t + 0.0
    }
    fn even_part(&self, t: f64) -> f64 {
        let mut s = 0.0;
        for k in (0..self.coeffs.len()).rev() {
            s = s * t + if k % 2 == 0 { self.coeffs[k] } else { 0.0 };
        }
        s
    }
}

/// Absolute tolerance of `pv_osc_1d`.
pub const PV_TOL: f64 = 1e-7;
const PAIRED_GL_VARIATION: f64 = 64.0;

/// p.v. ∫_{a<|t|<b} e^{iφ(t)} dt/t for 0 ≤ a < b ≤ 1/2.
pub fn pv_osc_1d(phase: &dyn OscPhase, a: f64, b: f64) -> Result<Complex64> {
    pv_osc_1d_weighted(phase, &|_| 1.0, a, b)
}

/// p.v. ∫_{a<|t|<b} e^{iφ(t)} F(t) dt/t with F even.
///
/// The region splits into dyadic shells b/2^{p+1} < |t| < b/2^p down to the
/// scale where the phase varies by less than one radian; below that the
/// ± halves are paired into the bounded integrand 2i e^{iφ_even} sin(φ_odd)/t.
pub fn pv_osc_1d_weighted(phase: &dyn OscPhase, weight: &(dyn Fn(f64) -> f64 + Sync), a: f64, b: f64) -> Result<Complex64> {
    if !(0.0 <= a && a < b && b <= 0.5 + 1e-15) {
        return Err(Error::RangeError(format!("need 0 ≤ a < b ≤ 1/2, got a={a}, b={b}")));
    }
    let paired = |t: f64| {
        let od = phase.odd_part(t);
        let ev = phase.even_part(t);
        Complex64::new(0.0, 2.0 * od.sin() / t * weight(t)) * Complex64::from_polar(1.0, ev)
    };
    let mut c = b;
    while phase.dphase_bound(c) * c > 1.0 && c > a {
        c *= 0.5;
    }
    let mut shells = Vec::new();
    let mut hi = b;
    while hi > a.max(c) {
        let lo = (0.5 * hi).max(a).max(c);
        shells.push((lo, hi));
        hi = lo;
    }
    let tol = PV_TOL / (shells.len() + 1) as f64 * 0.5;
    let mut total = Complex64::new(0.0, 0.0);
    if a < c {
        let (v, err) = gl_doubling(&paired, a, c.min(b), 16, 256, tol);
        if err > tol {
            return Err(Error::QuadratureFailed { residual: err });
        }
        total += v;
    }
    for (lo, hi) in shells {
        let var = phase.dphase_bound(hi) * (hi - lo);
        if var <= PAIRED_GL_VARIATION {
            let n0 = ((16.0 + var * 0.5).ceil() as usize).next_power_of_two();
            let (v, err) = gl_doubling(&paired, lo, hi, n0, 1024, tol);
            if err <= tol {
                total += v;
                continue;
            }
        }
        for sigma in [1.0, -1.0] {
            let f = |t: f64| sigma * weight(sigma * t) / t;
            let phi = |t: f64| phase.phase(sigma * t);
            let dphi = |t: f64| sigma * phase.dphase(sigma * t);
            let st = phase.stationary_points(sigma, lo, hi);
            total += osc_integral(&f, &phi, &dphi, lo, hi, &st, 0.5 * tol)?;
        }
    }
    Ok(total)
}

/// ∫₀^{1/2}∫₀^{1/2} sin(λst) ds/s dt/t = ∫₀^{1/2} Si(λt/2)/t dt = ∫₀^{λ/4} Si(u)/u du.
pub fn fefferman_sine(lambda: f64) -> f64 {
    assert!(lambda > 0.0 && lambda <= 1e8 * (1.0 + 1e-12));
    let upper = lambda / 4.0;
    // Beyond U₁, Si(u) = π/2 − f cos u − g sin u with f ~ 1/u, g ~ 1/u², so
    // ∫ (f cos + g sin)/u = [f sin/u] + O(1/U₁²).
    const U1: f64 = 2.0e4;
    let body_hi = upper.min(U1);
    let integrand = |u: f64| if u == 0.0 { 1.0 } else { si(u) / u };
    let panels = (body_hi / 2.0).ceil().max(1.0) as usize;
    let h = body_hi / panels as f64;
    let mut body = 0.0;
    for i in 0..panels {
        let a = i as f64 * h;
        body += gl_integrate_real(&integrand, a, a + h, 12);
    }
    if upper <= U1 {
        return body;
    }
    let edge = |u: f64| aux_fg(u).0 * u.sin() / u;
    body + FRAC_PI_2 * (upper / U1).ln() - (edge(upper) - edge(U1))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SwTrial {
    pub index: u64,
    pub coeffs: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub value: f64,
}

/// Draw trial `index` of the Stein–Wainger sweep: coefficient magnitudes
/// log-uniform in [1e−3, 1e6] with random signs, 0 ≤ a < b ≤ 1/2.
pub fn sw_draw(degree: usize, seed: u64, index: u64) -> (Vec<f64>, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let coeffs: Vec<f64> = (0..=degree)
        .map(|_| {
            let mag = 10f64.powf(rng.random_range(-3.0..6.0));
            if rng.random::<bool>() {
                mag
            } else {
                -mag
            }
        })
        .collect();
    loop {
        let x: f64 = rng.random_range(0.0..0.5);
        let y: f64 = rng.random_range(0.0..0.5);
        if x != y {
            return (coeffs, x.min(y), x.max(y));
        }
    }
}

/// |p.v. ∫_{a≤|t|≤b} e^{iP(t)} dt/t| for trials [start, end).
pub fn sw_values(degree: usize, seed: u64, start: u64, end: u64) -> Result<Vec<SwTrial>> {
    if degree > 5 {
        return Err(Error::RangeError(format!("degree {degree} > 5")));
    }
    let out = par::map_indexed((end - start) as usize, |i| {
        let index = start + i as u64;
        let (coeffs, a, b) = sw_draw(degree, seed, index);
        let v = pv_osc_1d(&PolyPhase { coeffs: coeffs.clone() }, a, b)?;
        Ok(SwTrial { index, coeffs, a, b, value: v.norm() })
    });
    out.into_iter().collect()
}

/// Max over T random trials; ties resolve to the lowest trial index.
pub fn sw_sample(degree: usize, trials: u64, seed: u64) -> Result<SwTrial> {
    if trials == 0 || trials > 1_000_000 {
        return Err(Error::RangeError(format!("trials {trials} outside 1..=1e6")));
    }
    let mut best: Option<SwTrial> = None;
    const CHUNK: u64 = 4096;
    let mut start = 0;
    while start < trials {
        let end = (start + CHUNK).min(trials);
        for t in sw_values(degree, seed, start, end)? {
            if best.as_ref().is_none_or(|b| t.value > b.value) {
                best = Some(t);
            }
        }
        start = end;
    }
    Ok(best.unwrap())
}
