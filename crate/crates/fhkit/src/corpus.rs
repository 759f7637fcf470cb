//! The canonical phase families used by the CLI corpus and the tests.

use crate::trigpoly::{PhaseFamily, TrigPoly};

/// sin(2πs) cos(2πt) = ½ sin 2π(s+t) + ½ sin 2π(s−t).
pub fn phi_product() -> TrigPoly {
    TrigPoly::from_terms(2, [([1, 1], 0.0, 0.5), ([1, -1], 0.0, 0.5)])
}

/// cos(2πs) + sin(2πt).
pub fn phi_split() -> TrigPoly {
    TrigPoly::from_terms(2, [([1, 0], 1.0, 0.0), ([0, 1], 0.0, 1.0)])
}

/// sin(2π(2s + 3t)).
pub fn phi_composite() -> TrigPoly {
    TrigPoly::from_terms(2, [([2, 3], 0.0, 1.0)])
}

/// cos(2πs)(−1 + sin(2πt)) = −cos 2πs + ½ sin 2π(s+t) − ½ sin 2π(s−t).
pub fn phi_square_example() -> TrigPoly {
    TrigPoly::from_terms(2, [([1, 0], -1.0, 0.0), ([1, 1], 0.0, 0.5), ([1, -1], 0.0, -0.5)])
}

/// The point where the square example has φ_tt = 0, φ_st ≠ 0 and φ_s = φ_t.
pub const SQUARE_EXAMPLE_POINT: (f64, f64) = (0.125, 0.0);

pub fn product_family() -> PhaseFamily {
    PhaseFamily::scalar(phi_product()).unwrap()
}

pub fn split_family() -> PhaseFamily {
    PhaseFamily::scalar(phi_split()).unwrap()
}

pub fn composite_family() -> PhaseFamily {
    PhaseFamily::scalar(phi_composite()).unwrap()
}

pub fn pure_character_family() -> PhaseFamily {
    PhaseFamily::new(vec![TrigPoly::zero(2)], vec![[3, 2]]).unwrap()
}

/// Lattice with L₁ ≥ 100 ‖φ‖_{C²} and L₂ > 1000 L₁ (bounded square sums).
pub fn bounded_square_lattice(phi: &TrigPoly) -> [i64; 2] {
    let l1 = (100.0 * phi.c2_norm()).ceil().max(1.0) as i64;
    [l1, 1000 * l1 + 1]
}

pub fn square_bounded_family() -> PhaseFamily {
    let phi = phi_square_example();
    let lat = bounded_square_lattice(&phi);
    PhaseFamily::new(vec![phi], vec![lat]).unwrap()
}

/// L = (1, 1): φ_s + L₁ = φ_t + L₂ = π√2 + 1 at the example point.
pub fn square_divergent_family() -> PhaseFamily {
    PhaseFamily::new(vec![phi_square_example()], vec![[1, 1]]).unwrap()
}

/// A two-component family whose contraction fails FH for most directions.
pub fn vector_product_family() -> PhaseFamily {
    PhaseFamily::new(vec![phi_product(), phi_split()], vec![[0, 0], [0, 0]]).unwrap()
}

/// (file stem, family) for every bundled phase file.
pub fn canonical_families() -> Vec<(&'static str, PhaseFamily)> {
    vec![
        ("product", product_family()),
        ("split", split_family()),
        ("composite", composite_family()),
        ("pure_character", pure_character_family()),
        ("square_bounded", square_bounded_family()),
        ("square_divergent", square_divergent_family()),
        ("vector_product", vector_product_family()),
    ]
}
