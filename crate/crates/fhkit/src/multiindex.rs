//! Enumeration of derivative multi-indices β_j and the weights h, w on
//! exponent vectors α.
//!
//! Variables X_j stand for D^{β_j} L. Indices are 1-based and ordered by
//! total degree, then by decreasing s-order: β₁=(1,0), β₂=(0,1), β₃=(2,0),
//! β₄=(1,1), β₅=(0,2), β₆=(3,0), …

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Beta {
    pub s: u32,
    pub t: u32,
}

impl Beta {
    pub fn new(s: u32, t: u32) -> Beta {
        assert!(s + t >= 1, "|beta| must be at least 1");
        Beta { s, t }
    }

    pub fn order(&self) -> u32 {
        self.s + self.t
    }

    pub fn swapped(&self) -> Beta {
        Beta { s: self.t, t: self.s }
    }
}

/// β_j for j ≥ 1. Block n (n ≥ 2) holds n(n−1)/2 ≤ j < n(n+1)/2 with
/// β_j = ((n−1)(n+2)/2 − j, j − n(n−1)/2).
pub fn beta_of(j: u32) -> Beta {
    assert!(j >= 1, "beta_of is 1-based");
    let j = j as u64;
    // largest n with n(n−1)/2 ≤ j
    let mut n = (((8 * j + 1) as f64).sqrt() as u64).div_ceil(2);
    while n * (n - 1) / 2 > j {
        n -= 1;
    }
    while (n + 1) * n / 2 <= j {
        n += 1;
    }
    let s = (n - 1) * (n + 2) / 2 - j;
    let t = j - n * (n - 1) / 2;
    Beta { s: s as u32, t: t as u32 }
}

pub fn index_of(b: Beta) -> u32 {
    assert!(b.order() >= 1);
    let n = b.order() + 1;
    n * (n - 1) / 2 + b.t
}

/// Sparse exponent vector: (variable index, exponent) sorted by index,
/// no zero exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Alpha(Vec<(u32, u32)>);

impl Alpha {
    pub fn one() -> Alpha {
        Alpha(Vec::new())
    }

    pub fn var(u: u32) -> Alpha {
        Alpha(vec![(u, 1)])
    }

    /// From a dense vector (α₁, …, α_n); trailing zeros are irrelevant.
    pub fn from_dense(exps: &[u32]) -> Alpha {
        Alpha(
            exps.iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| (i as u32 + 1, e))
                .collect(),
        )
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn exponent(&self, u: u32) -> u32 {
        self.0.iter().find(|(v, _)| *v == u).map(|(_, e)| *e).unwrap_or(0)
    }

    pub fn add(&self, other: &Alpha) -> Alpha {
        let mut out = self.clone();
        for &(u, e) in &other.0 {
            out.bump(u, e as i64);
        }
        out
    }

    /// Change the exponent of X_u by `delta` (must stay nonnegative).
    pub fn bump(&mut self, u: u32, delta: i64) {
        match self.0.binary_search_by_key(&u, |(v, _)| *v) {
            Ok(pos) => {
                let e = self.0[pos].1 as i64 + delta;
                assert!(e >= 0, "negative exponent");
                if e == 0 {
                    self.0.remove(pos);
                } else {
                    self.0[pos].1 = e as u32;
                }
            }
            Err(pos) => {
                assert!(delta >= 0, "negative exponent");
                if delta > 0 {
                    self.0.insert(pos, (u, delta as u32));
                }
            }
        }
    }

    pub fn with_var(&self, u: u32) -> Alpha {
        let mut a = self.clone();
        a.bump(u, 1);
        a
    }

    /// Relabel every variable through `f` (exponents of colliding labels add).
    pub fn relabel(&self, f: impl Fn(u32) -> u32) -> Alpha {
        let mut out = Alpha::one();
        for &(u, e) in &self.0 {
            out.bump(f(u), e as i64);
        }
        out
    }

    pub fn h_weight(&self) -> u64 {
        self.0.iter().map(|&(u, e)| e as u64 * beta_of(u).order() as u64).sum()
    }

    pub fn w_weight(&self) -> u64 {
        self.0.iter().map(|&(u, e)| e as u64 * (beta_of(u).s as u64 + 1)).sum()
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&(u, e)| if e == 1 { format!("X{u}") } else { format!("X{u}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

pub fn h_weight(a: &Alpha) -> u64 {
    a.h_weight()
}

pub fn w_weight(a: &Alpha) -> u64 {
    a.w_weight()
}
