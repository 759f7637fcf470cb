//! Exact coefficients Q^{k,l}_j expressing ∂^{k,l}ψ = Σ_j Q^{k,l}_j ∂_t^j ψ
//! when L = ψ_st/ψ_tt is analytic.
//!
//! Q^{k,l}_j lives in ℤ[L, X₁, X₂, …] where X_u stands for D^{β_u} L. The
//! l = 1 layer is built by recursion in k, then each further l by one
//! t-derivative; see `QTable::row`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multiindex::{beta_of, index_of, Alpha, Beta};
use crate::trigpoly::TrigPoly;

pub const MAX_DEPTH: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    S,
    T,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub lpow: u32,
    pub alpha: Alpha,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QPolynomial {
    terms: BTreeMap<Monomial, BigInt>,
}

/// The variable for ∂_t^v L: L itself when v = 0.
fn dt_power_of_l(v: u32) -> Option<u32> {
    if v == 0 {
        None
    } else {
        Some(index_of(Beta::new(0, v)))
    }
}

impl QPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn l_pow(p: u32) -> Self {
        let mut q = Self::zero();
        q.add_term(Monomial { lpow: p, alpha: Alpha::one() }, BigInt::one());
        q
    }

    pub fn var(u: u32) -> Self {
        let mut q = Self::zero();
        q.add_term(Monomial { lpow: 0, alpha: Alpha::var(u) }, BigInt::one());
        q
    }

    pub fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn add(&self, other: &QPolynomial) -> QPolynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> QPolynomial {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    /// Multiply by ∂_t^v L.
    fn times_dt_l(&self, v: u32) -> QPolynomial {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let nm = match dt_power_of_l(v) {
                None => Monomial { lpow: m.lpow + 1, alpha: m.alpha.clone() },
                Some(u) => Monomial { lpow: m.lpow, alpha: m.alpha.with_var(u) },
            };
            out.add_term(nm, c.clone());
        }
        out
    }

    /// Formal derivative: ∂L = X₁ (s) or X₂ (t), ∂X_u = X_{index(β_u + e)}.
    pub fn formal_derive(&self, axis: Axis) -> QPolynomial {
        let (dl, step) = match axis {
            Axis::S => (1u32, Beta { s: 1, t: 0 }),
            Axis::T => (2u32, Beta { s: 0, t: 1 }),
        };
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.lpow > 0 {
                let nm = Monomial { lpow: m.lpow - 1, alpha: m.alpha.with_var(dl) };
                out.add_term(nm, c * BigInt::from(m.lpow));
            }
            for &(u, e) in m.alpha.entries() {
                let b = beta_of(u);
                let next = index_of(Beta { s: b.s + step.s, t: b.t + step.t });
                let mut a = m.alpha.clone();
                a.bump(u, -1);
                a.bump(next, 1);
                out.add_term(Monomial { lpow: m.lpow, alpha: a }, c * BigInt::from(e));
            }
        }
        out
    }

    /// Keep the monomials for which `keep(lpow, alpha)` holds; used to set
    /// L and selected X_u to zero.
    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> QPolynomial {
        QPolynomial {
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Set L = 0 and every X_u with |β_u| ≤ max_order to 0.
    pub fn kill_low_orders(&self, max_order: u32) -> QPolynomial {
        self.filter(|m| m.lpow == 0 && m.alpha.entries().iter().all(|&(u, _)| beta_of(u).order() > max_order))
    }

    /// The coefficient polynomial of L^p (an element of ℤ[X]).
    pub fn l_coefficient(&self, p: u32) -> QPolynomial {
        self.filter(|m| m.lpow == p)
    }

    /// Relabel X_u -> X_{index(swap β_u)}; L keeps its name.
    pub fn swap_axes(&self) -> QPolynomial {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let a = m.alpha.relabel(|u| index_of(beta_of(u).swapped()));
            out.add_term(Monomial { lpow: m.lpow, alpha: a }, c.clone());
        }
        out
    }

    /// Numerical value with L = l and X_u = x(u).
    pub fn eval(&self, l: f64, x: impl Fn(u32) -> f64) -> f64 {
        let mut v = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN) * l.powi(m.lpow as i32);
            for &(u, e) in m.alpha.entries() {
                t *= x(u).powi(e as i32);
            }
            v += t;
        }
        v
    }
}

impl fmt::Display for QPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let mut parts = Vec::new();
            match m.lpow {
                0 => {}
                1 => parts.push("L".to_string()),
                p => parts.push(format!("L^{p}")),
            }
            if !m.alpha.is_one() {
                parts.push(m.alpha.to_string());
            }
            let body = parts.join("*");
            let neg = c.is_negative();
            let mag = c.abs();
            let sep = if first {
                if neg { "-" } else { "" }
            } else if neg {
                " - "
            } else {
                " + "
            };
            first = false;
            if body.is_empty() {
                write!(f, "{sep}{mag}")?;
            } else if mag.is_one() {
                write!(f, "{sep}{body}")?;
            } else {
                write!(f, "{sep}{mag}*{body}")?;
            }
        }
        Ok(())
    }
}

fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Memo of rows (k,l) -> [Q^{k,l}_2, …, Q^{k,l}_{k+l}].
#[derive(Debug, Default, Clone)]
pub struct QTable {
    rows: HashMap<(u32, u32), Vec<QPolynomial>>,
}

impl QTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build every row with k + l ≤ depth.
    pub fn with_depth(depth: u32) -> Result<Self> {
        let mut t = Self::new();
        for k in 1..depth {
            for l in 1..=(depth - k) {
                t.row(k, l)?;
            }
        }
        Ok(t)
    }

    pub fn row(&mut self, k: u32, l: u32) -> Result<&[QPolynomial]> {
        if k == 0 || l == 0 {
            return Err(Error::RangeError(format!("need k, l ≥ 1, got ({k}, {l})")));
        }
        if k + l > MAX_DEPTH {
            return Err(Error::DepthTooLarge { depth: k + l, limit: MAX_DEPTH });
        }
        if !self.rows.contains_key(&(k, l)) {
            let row = self.compute_row(k, l)?;
            self.rows.insert((k, l), row);
        }
        Ok(&self.rows[&(k, l)])
    }

    fn compute_row(&mut self, k: u32, l: u32) -> Result<Vec<QPolynomial>> {
        if k == 1 && l == 1 {
            return Ok(vec![QPolynomial::l_pow(1)]);
        }
        if l == 1 {
            // Q^{k,1}_j = ∂_s Q^{k−1,1}_j + Σ_{r=j−1}^{k} C(r−1, j−2) Q^{k−1,1}_r ∂_t^{r+1−j} L,
            // which also yields Q^{k,1}_{k+1} = L^k.
            let prev = self.row(k - 1, 1)?.to_vec();
            let get = |r: u32| -> Option<&QPolynomial> {
                if (2..=k).contains(&r) {
                    Some(&prev[(r - 2) as usize])
                } else {
                    None
                }
            };
            let mut out = Vec::new();
            for j in 2..=k + 1 {
                let mut q = get(j).map(|p| p.formal_derive(Axis::S)).unwrap_or_default();
                for r in (j - 1).max(2)..=k {
                    let term = get(r).unwrap().times_dt_l(r + 1 - j).scale(&binomial(r - 1, j - 2));
                    q = q.add(&term);
                }
                out.push(q);
            }
            debug_assert_eq!(out.last(), Some(&QPolynomial::l_pow(k)));
            return Ok(out);
        }
        // Q^{k,l}_j = ∂_t Q^{k,l−1}_j + Q^{k,l−1}_{j−1}, with Q^{k,l}_{k+l} = L^k.
        let prev = self.row(k, l - 1)?.to_vec();
        let top = k + l - 1;
        let get = |r: u32| -> Option<&QPolynomial> {
            if (2..=top).contains(&r) {
                Some(&prev[(r - 2) as usize])
            } else {
                None
            }
        };
        let mut out = Vec::new();
        for j in 2..=k + l {
            let mut q = get(j).map(|p| p.formal_derive(Axis::T)).unwrap_or_default();
            if let Some(p) = get(j - 1) {
                q = q.add(p);
            }
            out.push(q);
        }
        Ok(out)
    }

    pub fn get(&mut self, k: u32, l: u32, j: u32) -> Result<QPolynomial> {
        if j < 2 || j > k + l {
            return Err(Error::RangeError(format!("j = {j} outside 2..={}", k + l)));
        }
        Ok(self.row(k, l)?[(j - 2) as usize].clone())
    }

    /// Mirror coefficients R^{k,l}_j with ∂^{k,l}ψ = Σ_j R^{k,l}_j ∂_s^j ψ,
    /// where L now denotes ψ_st/ψ_ss: the axis swap of Q^{l,k}_j.
    pub fn get_r(&mut self, k: u32, l: u32, j: u32) -> Result<QPolynomial> {
        Ok(self.get(l, k, j)?.swap_axes())
    }
}

pub fn build_q(k: u32, l: u32, j: u32) -> Result<QPolynomial> {
    QTable::new().get(k, l, j)
}

pub fn formal_derive(q: &QPolynomial, axis: Axis) -> QPolynomial {
    q.formal_derive(axis)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckReport {
    pub check: String,
    pub checked: u64,
    pub passed: u64,
    pub violations: Vec<String>,
}

impl CheckReport {
    pub fn new(check: &str) -> Self {
        CheckReport { check: check.to_string(), checked: 0, passed: 0, violations: Vec::new() }
    }

    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.checked == self.passed
    }

    fn record(&mut self, pass: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if pass {
            self.passed += 1;
        } else {
            self.violations.push(what());
        }
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.checked += other.checked;
        self.passed += other.passed;
        self.violations.extend(other.violations);
    }
}

/// Every monomial L^{k−r} X^α of Q^{k,l}_j has w(α) = r and h(α) = k+l−j.
pub fn check_homogeneity(table: &mut QTable, k: u32, l: u32, j: u32) -> Result<CheckReport> {
    let q = table.get(k, l, j)?;
    let mut rep = CheckReport::new("homogeneity");
    let mut bad = Vec::new();
    for (m, _) in q.terms() {
        let r = k as i64 - m.lpow as i64;
        let ok = r >= 0 && m.alpha.w_weight() as i64 == r && m.alpha.h_weight() as i64 == (k + l - j) as i64;
        if !ok {
            bad.push(format!(
                "Q[{k},{l},{j}]: L^{} {} has w={} h={}",
                m.lpow,
                m.alpha,
                m.alpha.w_weight(),
                m.alpha.h_weight()
            ));
        }
    }
    let pass = bad.is_empty();
    rep.record(pass, || bad.join("; "));
    Ok(rep)
}

/// For 2 ≤ j ≤ l+1 the coefficient of the pure monomial D^{k−1,l+1−j} L
/// (at L⁰) is strictly positive. When that derivative is L itself the
/// designated monomial is L¹.
pub fn check_positivity(table: &mut QTable, k: u32, l: u32, j: u32) -> Result<CheckReport> {
    if j < 2 || j > l + 1 {
        return Err(Error::RangeError(format!("positivity needs 2 ≤ j ≤ l+1, got j = {j}, l = {l}")));
    }
    let q = table.get(k, l, j)?;
    let (bs, bt) = (k - 1, l + 1 - j);
    let mono = if bs + bt == 0 {
        Monomial { lpow: 1, alpha: Alpha::one() }
    } else {
        Monomial { lpow: 0, alpha: Alpha::var(index_of(Beta::new(bs, bt))) }
    };
    let c = q.coeff(&mono);
    let mut rep = CheckReport::new("positivity");
    rep.record(c.is_positive(), || format!("Q[{k},{l},{j}]: coefficient of D^({bs},{bt})L is {c}"));
    Ok(rep)
}

/// With L = 0 and X_u = 0 for |β_u| ≤ 2(2^μ − 1), Q^{k,l}_j vanishes for
/// every j > l + 2^{−μ−1} k.
pub fn check_vanishing_pattern(table: &mut QTable, k: u32, l: u32, mu: u32) -> Result<CheckReport> {
    if k + l > 10 {
        return Err(Error::DepthTooLarge { depth: k + l, limit: 10 });
    }
    let cutoff = 2 * ((1u32 << mu) - 1);
    let mut rep = CheckReport::new("vanishing");
    for j in 2..=k + l {
        // j > l + k / 2^{μ+1}  ⇔  2^{μ+1} (j − l) > k
        if j <= l || (1u64 << (mu + 1)) * (j - l) as u64 <= k as u64 {
            continue;
        }
        let q = table.get(k, l, j)?.kill_low_orders(cutoff);
        rep.record(q.is_zero(), || format!("Q[{k},{l},{j}] (mu={mu}) leaves {q}"));
    }
    Ok(rep)
}

/// With L = 0 and X_u = 0 for |β_u| ≤ r−1, the L⁰ part of Q^{k, m+r−k}_m
/// reduces to a single monomial D^{k−1, r−k+1} L with positive coefficient
/// (for r = 0 the whole of Q^{1, m−1}_m must be L).
pub fn check_leading_monomial(table: &mut QTable, m: u32, r: u32, k: u32) -> Result<CheckReport> {
    if k == 0 || k > r + 1 || m < 2 {
        return Err(Error::RangeError(format!("need m ≥ 2, 1 ≤ k ≤ r+1; got m={m}, r={r}, k={k}")));
    }
    let l = m + r - k;
    let full = table.get(k, l, m)?;
    // r = 0 forces k = 1 and the designated derivative is L itself
    let (q, want) = if r == 0 {
        (full, Monomial { lpow: 1, alpha: Alpha::one() })
    } else {
        let want = Monomial { lpow: 0, alpha: Alpha::var(index_of(Beta::new(k - 1, r + 1 - k))) };
        (full.l_coefficient(0).kill_low_orders(r - 1), want)
    };
    let ok = q.num_terms() == 1 && q.coeff(&want).is_positive();
    let mut rep = CheckReport::new("leading-monomial");
    rep.record(ok, || format!("m={m} r={r} k={k}: reduced polynomial is {q}"));
    Ok(rep)
}

/// Residual of ∂^{k,l}ψ = Σ_j Q^{k,l}_j ∂_t^j ψ on ψ(s,t) = f(as + bt),
/// where L ≡ a/b and every derivative of L vanishes.
pub fn verify_identity_on_composite(
    table: &mut QTable,
    f: &TrigPoly,
    a: i64,
    b: i64,
    k: u32,
    l: u32,
    point: [f64; 2],
) -> Result<f64> {
    if b == 0 {
        return Err(Error::RangeError("b must be nonzero".into()));
    }
    if f.dim() != 1 {
        return Err(Error::DimMismatch { expected: 1, got: f.dim() });
    }
    if k == 0 || l == 0 || k + l > 10 {
        return Err(Error::RangeError(format!("need k, l ≥ 1 and k+l ≤ 10, got ({k}, {l})")));
    }
    let psi = f.compose_linear(a, b);
    let lhs = psi.derive((k, l))?.eval(&point);
    let lval = a as f64 / b as f64;
    let mut rhs = 0.0;
    for j in 2..=k + l {
        let q = table.get(k, l, j)?;
        let c = q.eval(lval, |_| 0.0);
        if c != 0.0 {
            rhs += c * psi.derive((0, j))?.eval(&point);
        }
    }
    Ok((lhs - rhs).abs())
}
