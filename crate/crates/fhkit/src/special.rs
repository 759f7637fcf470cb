//! Sine and cosine integrals.
//!
//! Power series below 4, a continued fraction for E₁(ix) on [4, 40), and the
//! asymptotic expansion from 40 on, where its smallest term is below 1e−17.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// (Si(x), Ci(x)) for x > 0; Ci is −∞ at 0.
pub fn si_ci(x: f64) -> (f64, f64) {
    assert!(x >= 0.0 && x.is_finite());
    if x == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    if x < 4.0 {
        series(x)
    } else if x < 40.0 {
        continued_fraction(x)
    } else {
        let (f, g) = aux_asymptotic(x);
        let (s, c) = x.sin_cos();
        (FRAC_PI_2 - f * c - g * s, f * s - g * c)
    }
}

/// Si(x) = ∫₀ˣ sin(u)/u du, odd in x.
pub fn si(x: f64) -> f64 {
    if x < 0.0 {
        -si_ci(-x).0
    } else {
        si_ci(x).0
    }
}

pub fn ci(x: f64) -> f64 {
    si_ci(x).1
}

/// Auxiliary functions f, g with Si = π/2 − f cos − g sin, Ci = f sin − g cos.
pub fn aux_fg(x: f64) -> (f64, f64) {
    assert!(x > 0.0);
    if x >= 40.0 {
        return aux_asymptotic(x);
    }
    let (s_i, c_i) = si_ci(x);
    let (s, c) = x.sin_cos();
    let a = FRAC_PI_2 - s_i;
    (c_i * s + a * c, -c_i * c + a * s)
}

fn series(x: f64) -> (f64, f64) {
    let x2 = x * x;
    // Si = Σ (−1)^k x^{2k+1} / ((2k+1)(2k+1)!)
    let mut term = x; // x^{2k+1}/(2k+1)!
    let mut si = 0.0;
    let mut k = 0u32;
    loop {
        let add = term / (2 * k + 1) as f64;
        si += if k.is_multiple_of(2) { add } else { -add };
        if add.abs() < 1e-18 * si.abs().max(1e-300) {
            break;
        }
        k += 1;
        term *= x2 / ((2 * k) as f64 * (2 * k + 1) as f64);
    }
    // Ci = γ + ln x + Σ_{k≥1} (−1)^k x^{2k} / (2k (2k)!)
    let mut term = 1.0; // x^{2k}/(2k)!
    let mut sum = 0.0;
    let mut k = 1u32;
    loop {
        term *= x2 / ((2 * k - 1) as f64 * (2 * k) as f64);
        let add = term / (2 * k) as f64;
        sum += if k % 2 == 1 { -add } else { add };
        if add < 1e-18 {
            break;
        }
        k += 1;
    }
    (si, EULER_GAMMA + x.ln() + sum)
}

/// E₁(ix) by the modified Lentz continued fraction; Ci + i(Si − π/2) = −E₁(ix).
fn continued_fraction(x: f64) -> (f64, f64) {
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = Complex64::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 1..200u32 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = Complex64::new(1.0, 0.0) / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    h *= Complex64::new(x.cos(), -x.sin());
    (FRAC_PI_2 + h.im, -h.re)
}

fn aux_asymptotic(x: f64) -> (f64, f64) {
    // f ~ (1/x) Σ (−1)^k (2k)!/x^{2k},  g ~ (1/x²) Σ (−1)^k (2k+1)!/x^{2k}
    let inv2 = 1.0 / (x * x);
    let (mut f, mut g) = (0.0, 0.0);
    let (mut tf, mut tg) = (1.0f64, 1.0f64);
    let mut prev = f64::INFINITY;
    for k in 0..60u32 {
        if tf.abs().max(tg.abs()) > prev {
            break;
        }
        prev = tf.abs().max(tg.abs());
        f += tf;
        g += tg;
        let kk = k as f64;
        tf *= -(2.0 * kk + 1.0) * (2.0 * kk + 2.0) * inv2;
        tg *= -(2.0 * kk + 2.0) * (2.0 * kk + 3.0) * inv2;
        if prev < 1e-18 {
            break;
        }
    }
    (f / x, g * inv2)
}

/// The global maximum of Si on [0, ∞), attained at π.
pub fn si_max() -> f64 {
    si(PI)
}
