//! Real trigonometric polynomials on the 1- and 2-torus.
//!
//! A term with frequency `m` and amplitudes `(a, b)` contributes
//! `a cos(2π m·t) + b sin(2π m·t)`. Keys are canonical: the first nonzero
//! entry of `m` is positive, and the constant term keeps only `a`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DERIVATIVE_ORDER: u32 = 64;

pub type Freq = [i64; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    dim: usize,
    terms: BTreeMap<Freq, (f64, f64)>,
}

fn canonical(m: Freq, a: f64, b: f64) -> (Freq, f64, f64) {
    let first = if m[0] != 0 { m[0] } else { m[1] };
    if first < 0 {
        ([-m[0], -m[1]], a, -b)
    } else if first == 0 {
        (m, a, 0.0)
    } else {
        (m, a, b)
    }
}

/// Fractional part of `m·t` in [-1/2, 1/2), computed before scaling by 2π
/// so that evaluation is periodic to rounding.
#[inline]
fn reduced_angle(m: &Freq, t: &[f64]) -> f64 {
    let mut x = m[0] as f64 * t[0];
    if t.len() > 1 {
        x += m[1] as f64 * t[1];
    }
    2.0 * PI * (x - x.round())
}

impl TrigPoly {
    pub fn zero(dim: usize) -> Self {
        assert!(dim == 1 || dim == 2, "TrigPoly dim must be 1 or 2");
        TrigPoly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term([0, 0], c, 0.0);
        p
    }

    /// Build from `(m, a, b)` triples; repeated frequencies accumulate.
    pub fn from_terms<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Freq, f64, f64)>,
    {
        let mut p = Self::zero(dim);
        for (m, a, b) in terms {
            p.add_term(m, a, b);
        }
        p
    }

    pub fn add_term(&mut self, m: Freq, a: f64, b: f64) {
        assert!(self.dim == 2 || m[1] == 0, "1-D polynomial with a t-frequency");
        let (m, a, b) = canonical(m, a, b);
        let e = self.terms.entry(m).or_insert((0.0, 0.0));
        e.0 += a;
        e.1 += b;
        if e.0 == 0.0 && e.1 == 0.0 {
            self.terms.remove(&m);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Freq, &(f64, f64))> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: Freq) -> (f64, f64) {
        // Amplitudes as seen from the key `m`, canonical or not.
        let (key, _, _) = canonical(m, 0.0, 0.0);
        let (a, b) = self.terms.get(&key).copied().unwrap_or((0.0, 0.0));
        if key != m {
            (a, -b)
        } else {
            (a, b)
        }
    }

    /// Largest |m_i| over the support (0 for a constant).
    pub fn max_freq(&self) -> i64 {
        self.terms.keys().map(|m| m[0].abs().max(m[1].abs())).max().unwrap_or(0)
    }

    /// Σ (|a| + |b|): bounds the sup norm.
    pub fn coeff_sum(&self) -> f64 {
        self.terms.values().map(|(a, b)| a.abs() + b.abs()).sum()
    }

    /// Bound on |∂_s p| (axis 0) or |∂_t p| (axis 1) in cycles per unit
    /// length, i.e. Σ |m_axis| (|a|+|b|).
    pub fn freq_weighted_sum(&self, axis: usize) -> f64 {
        self.terms.iter().map(|(m, (a, b))| m[axis].abs() as f64 * (a.abs() + b.abs())).sum()
    }

    pub fn scale(&self, c: f64) -> TrigPoly {
        let mut out = Self::zero(self.dim);
        if c != 0.0 {
            for (m, (a, b)) in &self.terms {
                out.add_term(*m, a * c, b * c);
            }
        }
        out
    }

    pub fn add(&self, other: &TrigPoly) -> Result<TrigPoly> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch { expected: self.dim, got: other.dim });
        }
        let mut out = self.clone();
        for (m, (a, b)) in &other.terms {
            out.add_term(*m, *a, *b);
        }
        Ok(out)
    }

    /// Term-wise partial derivative ∂^{k,l}, applied as k single s-steps
    /// followed by l single t-steps, so that differentiating in stages in
    /// that order reproduces the coefficients bit for bit. Each step along an
    /// axis multiplies by 2π m_axis and rotates (a, b) -> (b, -a).
    pub fn derive(&self, order: (u32, u32)) -> Result<TrigPoly> {
        let (k, l) = order;
        if k + l > MAX_DERIVATIVE_ORDER {
            return Err(Error::OrderTooLarge { order: k + l, limit: MAX_DERIVATIVE_ORDER });
        }
        if self.dim == 1 && l > 0 {
            return Err(Error::DimMismatch { expected: 2, got: 1 });
        }
        let mut out = Self::zero(self.dim);
        for (m, &(a, b)) in &self.terms {
            let (mut a, mut b) = (a, b);
            let steps = std::iter::repeat_n(m[0], k as usize).chain(std::iter::repeat_n(m[1], l as usize));
            for freq in steps {
                let c = 2.0 * PI * freq as f64;
                (a, b) = (b * c, -a * c);
            }
            if a != 0.0 || b != 0.0 {
                out.add_term(*m, a, b);
            }
        }
        Ok(out)
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        debug_assert_eq!(t.len(), self.dim);
        let mut v = 0.0;
        for (m, &(a, b)) in &self.terms {
            if m[0] == 0 && m[1] == 0 {
                v += a;
                continue;
            }
            let (s, c) = reduced_angle(m, t).sin_cos();
            v += a * c + b * s;
        }
        v
    }

    pub fn eval2(&self, x: f64, y: f64) -> f64 {
        self.eval(&[x, y])
    }

    /// Certified upper bound on max_{|k|+|l|≤2} sup |∂^{k,l} p|: the sup over
    /// a grid plus (third-derivative coefficient bound) × (grid spacing).
    pub fn c2_norm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let orders: Vec<(u32, u32)> = if self.dim == 2 {
            vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
        } else {
            vec![(0, 0), (1, 0), (2, 0)]
        };
        let derivs: Vec<TrigPoly> = orders.iter().map(|&o| self.derive(o).unwrap()).collect();
        // Each derivative D moves by at most |∇D|_1 · h/2 ≤ (coeff sums of
        // its first derivatives) · h/2 between a point and its nearest node.
        let lip: Vec<f64> = derivs
            .iter()
            .map(|d| {
                let ds = d.derive((1, 0)).unwrap().coeff_sum();
                let dt = if self.dim == 2 { d.derive((0, 1)).unwrap().coeff_sum() } else { 0.0 };
                ds + dt
            })
            .collect();
        let mut n = 64usize;
        loop {
            let h = 1.0 / n as f64;
            let mut best: f64 = 0.0;
            for (d, lp) in derivs.iter().zip(&lip) {
                let sup = grid_sup(d, n);
                best = best.max(sup + lp * h / 2.0);
            }
            let slack = lip.iter().cloned().fold(0.0, f64::max) * h / 2.0;
            if slack <= 0.004 * best || n >= 4096 {
                return best;
            }
            n *= 2;
        }
    }

    /// Text format: one `m1 m2 a b` line per term, canonical order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (m, (a, b)) in &self.terms {
            writeln!(s, "{} {} {} {}", m[0], m[1], a, b).unwrap();
        }
        s
    }

    /// Parse the text format. Blank lines and `#` comments are skipped.
    pub fn from_text(text: &str, dim: usize) -> Result<TrigPoly> {
        let mut p = Self::zero(dim);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected `m1 m2 a b`", lineno + 1)));
            }
            let bad = |what: &str| Error::Parse(format!("line {}: bad {}", lineno + 1, what));
            let m1: i64 = f[0].parse().map_err(|_| bad("m1"))?;
            let m2: i64 = f[1].parse().map_err(|_| bad("m2"))?;
            let a: f64 = f[2].parse().map_err(|_| bad("a"))?;
            let b: f64 = f[3].parse().map_err(|_| bad("b"))?;
            if !a.is_finite() || !b.is_finite() {
                return Err(bad("amplitude"));
            }
            if dim == 1 && m2 != 0 {
                return Err(Error::Parse(format!("line {}: m2 must be 0 in 1-D", lineno + 1)));
            }
            p.add_term([m1, m2], a, b);
        }
        Ok(p)
    }

    /// Regard a 1-D polynomial f as the 2-D polynomial f(a s + b t).
    pub fn compose_linear(&self, a: i64, b: i64) -> TrigPoly {
        assert_eq!(self.dim, 1);
        let mut out = Self::zero(2);
        for (m, &(ca, cb)) in &self.terms {
            out.add_term([m[0] * a, m[0] * b], ca, cb);
        }
        out
    }

    /// 1-D section t ↦ p(x, t) (axis 1) or s ↦ p(s, y) (axis 0).
    pub fn section(&self, axis: usize, at: f64) -> TrigPoly {
        assert_eq!(self.dim, 2);
        let mut out = Self::zero(1);
        let other = 1 - axis;
        for (m, &(a, b)) in &self.terms {
            // a cos(θ + φ0) + b sin(θ + φ0), φ0 fixed by the frozen variable.
            let phi0 = 2.0 * PI * (m[other] as f64 * at).rem_euclid(1.0);
            let (s0, c0) = phi0.sin_cos();
            let na = a * c0 + b * s0;
            let nb = -a * s0 + b * c0;
            out.add_term([m[axis], 0], na, nb);
        }
        out
    }
}

fn grid_sup(p: &TrigPoly, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut sup: f64 = 0.0;
    if p.dim == 1 {
        for i in 0..n {
            sup = sup.max(p.eval(&[i as f64 * h]).abs());
        }
    } else {
        for i in 0..n {
            for j in 0..n {
                sup = sup.max(p.eval(&[i as f64 * h, j as f64 * h]).abs());
            }
        }
    }
    sup
}

/// Unit direction ω ∈ S^{d-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    pub fn new(omega: Vec<f64>) -> Result<Direction> {
        let norm = omega.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnit { norm });
        }
        Ok(Direction(omega))
    }

    pub fn normalized(v: &[f64]) -> Result<Direction> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotUnit { norm });
        }
        Ok(Direction(v.iter().map(|x| x / norm).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// d components on the 2-torus plus the integer lattice part, row j = (L_{j1}, L_{j2}).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFamily {
    pub components: Vec<TrigPoly>,
    pub lattice: Vec<[i64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct PhaseFamilyJson {
    components: Vec<Vec<(i64, i64, f64, f64)>>,
    lattice: Vec<[i64; 2]>,
}

impl PhaseFamily {
    pub fn new(components: Vec<TrigPoly>, lattice: Vec<[i64; 2]>) -> Result<PhaseFamily> {
        if components.is_empty() {
            return Err(Error::RangeError("a phase family needs at least one component".into()));
        }
        if lattice.len() != components.len() {
            return Err(Error::DimMismatch { expected: components.len(), got: lattice.len() });
        }
        if let Some(c) = components.iter().find(|c| c.dim() != 2) {
            return Err(Error::DimMismatch { expected: 2, got: c.dim() });
        }
        Ok(PhaseFamily { components, lattice })
    }

    /// Scalar family with zero lattice part.
    pub fn scalar(phi: TrigPoly) -> Result<PhaseFamily> {
        Self::new(vec![phi], vec![[0, 0]])
    }

    pub fn d(&self) -> usize {
        self.components.len()
    }

    /// ψ = Σ ω_j φ_j.
    pub fn contract(&self, omega: &Direction) -> Result<TrigPoly> {
        self.weighted_sum(omega.as_slice())
    }

    /// Σ w_j φ_j for an arbitrary weight vector.
    pub fn weighted_sum(&self, w: &[f64]) -> Result<TrigPoly> {
        if w.len() != self.d() {
            return Err(Error::DimMismatch { expected: self.d(), got: w.len() });
        }
        let mut out = TrigPoly::zero(2);
        for (c, &wj) in self.components.iter().zip(w) {
            out = out.add(&c.scale(wj))?;
        }
        Ok(out)
    }

    /// ω·L⃗₁ and ω·L⃗₂.
    pub fn lattice_dot(&self, w: &[f64]) -> [f64; 2] {
        let mut r = [0.0; 2];
        for (row, wj) in self.lattice.iter().zip(w) {
            r[0] += wj * row[0] as f64;
            r[1] += wj * row[1] as f64;
        }
        r
    }

    pub fn to_json(&self) -> String {
        let j = PhaseFamilyJson {
            components: self
                .components
                .iter()
                .map(|c| c.terms().map(|(m, &(a, b))| (m[0], m[1], a, b)).collect())
                .collect(),
            lattice: self.lattice.clone(),
        };
        serde_json::to_string_pretty(&j).unwrap()
    }

    pub fn from_json(text: &str) -> Result<PhaseFamily> {
        let j: PhaseFamilyJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let comps = j
            .components
            .into_iter()
            .map(|terms| TrigPoly::from_terms(2, terms.into_iter().map(|(m1, m2, a, b)| ([m1, m2], a, b))))
            .collect();
        PhaseFamily::new(comps, j.lattice)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn derive_sin_t() {
        let p = TrigPoly::from_terms(2, [([0, 1], 0.0, 1.0)]);
        let d = p.derive((0, 1)).unwrap();
        assert_eq!(d.coeff([0, 1]), (2.0 * PI, 0.0));
    }

    #[test]
    fn derive_product_mixed() {
        // sin(2πs)cos(2πt) = ½ sin(2π(s+t)) + ½ sin(2π(s−t))
        let p = TrigPoly::from_terms(2, [([1, 1], 0.0, 0.5), ([1, -1], 0.0, 0.5)]);
        let d = p.derive((1, 1)).unwrap();
        assert!(close(d.eval2(0.0, 0.25), -4.0 * PI * PI, 1e-14));
        let x = 0.137;
        let y = 0.61;
        let want = -4.0 * PI * PI * (2.0 * PI * x).cos() * (2.0 * PI * y).sin();
        assert!(close(d.eval2(x, y), want, 1e-13));
    }

    #[test]
    fn derive_constant_is_zero() {
        assert!(TrigPoly::constant(2, 3.0).derive((1, 0)).unwrap().is_zero());
    }

    #[test]
    fn derive_order_guard() {
        let p = TrigPoly::from_terms(2, [([1, 0], 1.0, 0.0)]);
        assert!(p.derive((32, 32)).is_ok());
        assert_eq!(p.derive((33, 32)), Err(Error::OrderTooLarge { order: 65, limit: 64 }));
    }

    #[test]
    fn eval_examples() {
        let c = TrigPoly::from_terms(1, [([1, 0], 1.0, 0.0)]);
        assert_eq!(c.eval(&[0.0]), 1.0);
        let p = TrigPoly::from_terms(2, [([1, 1], 0.0, 0.5), ([1, -1], 0.0, 0.5)]);
        assert!(close(p.eval2(0.25, 0.0), 1.0, 1e-15));
        let q = crate::corpus::phi_square_example();
        assert!(close(q.eval2(0.125, 0.0), -(2f64).sqrt() / 2.0, 1e-15));
    }

    #[test]
    fn canonical_keys() {
        let p = TrigPoly::from_terms(2, [([-1, 2], 1.0, 1.0)]);
        assert_eq!(p.coeff([1, -2]), (1.0, -1.0));
        assert_eq!(p.coeff([-1, 2]), (1.0, 1.0));
        let x = [0.3, 0.8];
        let direct = (2.0 * PI * (-0.3 + 1.6)).cos() + (2.0 * PI * (-0.3 + 1.6)).sin();
        assert!(close(p.eval(&x), direct, 1e-13));
        // cancelling terms leave no stored zero
        let z = TrigPoly::from_terms(2, [([1, 0], 1.0, 0.0), ([-1, 0], -1.0, 0.0)]);
        assert!(z.is_zero());
    }

    #[test]
    fn contract_examples() {
        let p = TrigPoly::from_terms(2, [([1, 0], 1.0, 0.0)]);
        let q = TrigPoly::from_terms(2, [([0, 1], 0.0, 2.0)]);
        let f1 = PhaseFamily::scalar(q.clone()).unwrap();
        assert_eq!(f1.contract(&Direction::new(vec![1.0]).unwrap()).unwrap(), q);
        let f2 = PhaseFamily::new(vec![p.clone(), q.clone()], vec![[0, 0], [0, 0]]).unwrap();
        assert_eq!(f2.contract(&Direction::new(vec![1.0, 0.0]).unwrap()).unwrap(), p);
        let f3 = PhaseFamily::new(vec![p.clone(), p.clone()], vec![[0, 0], [0, 0]]).unwrap();
        let c = f3.contract(&Direction::new(vec![0.6, 0.8]).unwrap()).unwrap();
        assert!(close(c.coeff([1, 0]).0, 1.4, 1e-15));
        assert_eq!(c.num_terms(), 1);
        assert!(matches!(f3.contract(&Direction::new(vec![1.0]).unwrap()), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn c2_norm_examples() {
        assert_eq!(TrigPoly::constant(2, 5.0).c2_norm(), 5.0);
        assert_eq!(TrigPoly::zero(2).c2_norm(), 0.0);
        let s = TrigPoly::from_terms(2, [([0, 1], 0.0, 1.0)]);
        let v = s.c2_norm();
        let lo = 4.0 * PI * PI;
        assert!(v >= lo && v <= lo * 1.01, "{v}");
    }

    #[test]
    fn text_round_trip() {
        let p = TrigPoly::from_terms(2, [([1, 1], 0.1, -0.0), ([2, -3], 1e-300, 3.25), ([0, 0], -7.5, 0.0)]);
        let q = TrigPoly::from_text(&p.to_text(), 2).unwrap();
        assert_eq!(p.to_text(), q.to_text());
        assert!(TrigPoly::from_text("1 2 3", 2).is_err());
        assert!(TrigPoly::from_text("1 2 x 0", 2).is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = crate::corpus::product_family();
        let g = PhaseFamily::from_json(&f.to_json()).unwrap();
        assert_eq!(f, g);
        assert!(PhaseFamily::from_json("{\"components\": [], \"lattice\": []}").is_err());
    }

    #[test]
    fn section_matches_eval() {
        let p = crate::corpus::phi_square_example();
        let sec = p.section(1, 0.3);
        for &t in &[0.0, 0.11, 0.7] {
            assert!(close(sec.eval(&[t]), p.eval2(0.3, t), 1e-13));
        }
        let sec0 = p.section(0, 0.9);
        assert!(close(sec0.eval(&[0.2]), p.eval2(0.2, 0.9), 1e-13));
    }

    #[test]
    fn direction_checks() {
        assert!(Direction::new(vec![0.6, 0.8]).is_ok());
        assert!(Direction::new(vec![1.0, 1.0]).is_err());
        let d = Direction::normalized(&[3.0, 4.0]).unwrap();
        assert_eq!(d.as_slice(), &[0.6, 0.8]);
    }
}
