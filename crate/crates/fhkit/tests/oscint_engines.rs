use std::f64::consts::PI;

use fhkit::corpus;
use fhkit::oscint::*;
use fhkit::quad::gl_integrate;
use fhkit::special::si;
use fhkit::{par, PhaseFamily, TrigPoly};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sin_s() -> PhaseFamily {
    PhaseFamily::scalar(TrigPoly::from_terms(2, [([1, 0], 0.0, 1.0)])).unwrap()
}

#[test]
fn one_dimensional_coefficients_match_trapezoid() {
    // e^{2πi n sin 2πs}: trapezoid on M nodes is exact up to aliasing of order J_M(2πn)
    let m = 4096;
    for n in [1, 3] {
        let field = build_character(&sin_s(), n, GridChoice::Fixed(256)).unwrap();
        for k in -30i64..=30 {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..m {
                let s = j as f64 / m as f64;
                let ph = 2.0 * PI * (n as f64 * (2.0 * PI * s).sin() - k as f64 * s);
                acc += Complex64::from_polar(1.0, ph);
            }
            acc /= m as f64;
            assert!((field.coeff(k, 0) - acc).norm() < 1e-8, "n={n} k={k}");
            assert!(field.coeff(k, 1).norm() < 1e-12);
        }
    }
}

#[test]
fn zero_multiplier_and_pure_character() {
    let f = build_character(&corpus::product_family(), 0, GridChoice::default()).unwrap();
    assert!((f.coeff(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    assert!((f.partial_sum_at(0, 0, 0.3, 0.2).unwrap() - 1.0).abs() < 1e-14);

    let p = build_character(&corpus::pure_character_family(), 4, GridChoice::default()).unwrap();
    assert_eq!(p.shift, [12, 8]);
    assert!((p.coeff(12, 8).norm() - 1.0).abs() < 1e-14);
    assert_eq!(p.partial_sum_at(11, 8, 0.1, 0.1).unwrap(), 0.0);
    assert!((p.partial_sum_at(12, 8, 0.1, 0.1).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn field_invariants_on_corpus() {
    for (name, f) in corpus::canonical_families() {
        let d = f.d();
        let n: Multiplier = if d == 1 { 16.into() } else { Multiplier::Vector(vec![16, -7]) };
        let field = build_character(&f, n, GridChoice::default()).unwrap();
        assert!(field.unimodularity_error < 1e-12, "{name}");
        assert!((field.energy() - 1.0).abs() < 1e-10, "{name}");
        assert!(field.parseval_error < 1e-10, "{name}");
        assert!(field.tail_mass <= ALIAS_TAIL_LIMIT, "{name}");
    }
}

#[test]
fn complete_window_reproduces_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for f in [corpus::product_family(), corpus::composite_family(), corpus::square_divergent_family()] {
        let field = build_character(&f, 8, GridChoice::default()).unwrap();
        let [m, n] = field.max_order();
        let m = m.max((0.9 * field.grid as f64 / 2.0) as i64);
        let n = n.max((0.9 * field.grid as f64 / 2.0) as i64);
        for _ in 0..5 {
            let (x, y) = (rng.random::<f64>(), rng.random::<f64>());
            assert!((field.partial_sum_at(m, n, x, y).unwrap() - 1.0).abs() < 1e-6);
        }
        let sup = field.partial_sum_sup(m, n).unwrap().sup;
        assert!((sup - 1.0).abs() < 1e-6);
    }
}

#[test]
fn zero_window_is_mean() {
    let field = build_character(&corpus::product_family(), 5, GridChoice::default()).unwrap();
    let c0 = field.coeff(0, 0).norm();
    assert!((field.partial_sum_at(0, 0, 0.41, 0.07).unwrap() - c0).abs() < 1e-13);
    assert!((field.partial_sum_sup(0, 0).unwrap().sup - c0).abs() < 1e-13);
}

#[test]
fn negative_orders_rejected() {
    let field = build_character(&corpus::split_family(), 2, GridChoice::default()).unwrap();
    assert!(field.partial_sum_at(-1, 0, 0.0, 0.0).is_err());
    assert!(field.partial_sum_sup(0, -3).is_err());
}

/// S_{M,N}g(x, y) = ∫∫ g(x−s, y−t) D_M(s) D_N(t) ds dt by a P × P trapezoid,
/// exact for trig polynomials of degree < P.
fn direct_partial_sum(phase: &TrigPoly, m: u64, n: u64, x: f64, y: f64, p: usize) -> f64 {
    let h = 1.0 / p as f64;
    let dm: Vec<f64> = (0..p).map(|i| dirichlet(m, i as f64 * h)).collect();
    let dn: Vec<f64> = (0..p).map(|j| dirichlet(n, j as f64 * h)).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (i, wm) in dm.iter().enumerate() {
        let mut row = Complex64::new(0.0, 0.0);
        for (j, wn) in dn.iter().enumerate() {
            let v = phase.eval2(x - i as f64 * h, y - j as f64 * h);
            row += Complex64::from_polar(1.0, 2.0 * PI * v) * wn;
        }
        total += row * wm;
    }
    (total * h * h).norm()
}

#[test]
fn pipeline_matches_dirichlet_quadrature() {
    let f = corpus::product_family();
    let field = build_character(&f, 4, GridChoice::Fixed(1024)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let (m, n) = (rng.random_range(0..=64i64), rng.random_range(0..=64i64));
        let (x, y) = (rng.random::<f64>(), rng.random::<f64>());
        let got = field.partial_sum_at(m, n, x, y).unwrap();
        let want = direct_partial_sum(&field.phase, m as u64, n as u64, x, y, 256);
        assert!((got - want).abs() < 1e-8 * want.max(1.0), "({m},{n}) at ({x},{y}): {got} vs {want}");
    }
}

#[test]
fn grid_sup_agrees_with_pointwise() {
    let field = build_character(&corpus::split_family(), 12, GridChoice::default()).unwrap();
    for (m, n) in [(3, 40), (17, 17), (60, 2)] {
        let g = field.partial_sum_on_grid(m, n, 256, 256, true).unwrap();
        let (x, y) = g.argmax;
        assert!((field.partial_sum_at(m, n, x, y).unwrap() - g.sup).abs() < 1e-10);
        let vals = g.values.unwrap();
        assert_eq!(vals.len(), 256 * 256);
        assert!(vals.iter().all(|&v| v <= g.sup));
    }
}

/// ∫_{a<|t|<b} e^{iφ(t)} dt/t by panel GL on (e^{iφ(t)} − e^{iφ(−t)})/t.
fn brute_pv(phase: &dyn OscPhase, a: f64, b: f64) -> Complex64 {
    let g = |t: f64| (Complex64::from_polar(1.0, phase.phase(t)) - Complex64::from_polar(1.0, phase.phase(-t))) / t;
    let mut total = Complex64::new(0.0, 0.0);
    let panels = 4000;
    let h = (b - a) / panels as f64;
    for i in 0..panels {
        let lo = a + i as f64 * h;
        total += gl_integrate(&g, lo, lo + h, 24);
    }
    total
}

#[test]
fn pv_matches_si_for_linear_phase() {
    for &(rho, a, b) in &[(1.0, 0.0, 0.5), (37.5, 0.01, 0.4), (-900.0, 0.0, 0.5), (1e5, 1e-4, 0.25)] {
        let p = PolyPhase { coeffs: vec![0.0, 2.0 * PI * rho] };
        let v = pv_osc_1d(&p, a, b).unwrap();
        let c = 2.0 * PI * rho;
        let want = Complex64::new(0.0, 2.0 * (si(c * b) - si(c * a)));
        assert!((v - want).norm() < PV_TOL, "rho={rho}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pv_poly_matches_brute_force(
        c in prop::collection::vec(-40.0f64..40.0, 1..=4),
        ab in (0.0f64..0.5, 0.0f64..0.5),
    ) {
        let (a, b) = if ab.0 < ab.1 { ab } else { (ab.1, ab.0) };
        prop_assume!(b - a > 1e-3);
        let p = PolyPhase { coeffs: c };
        let v = pv_osc_1d(&p, a, b).unwrap();
        let w = brute_pv(&p, a, b);
        prop_assert!((v - w).norm() < 1e-6, "{v} vs {w}");
    }

    #[test]
    fn pv_section_matches_brute_force(
        a1 in -1.0f64..1.0, b1 in -1.0f64..1.0, b2 in -1.0f64..1.0,
        lambda in 0.5f64..8.0, rho in -10.0f64..10.0, x in 0.0f64..1.0,
    ) {
        let sec = TrigPoly::from_terms(1, [([1, 0], a1, b1), ([2, 0], 0.0, b2)]);
        let p = SectionPhase::new(sec, lambda, rho, x).unwrap();
        let v = pv_osc_1d(&p, 0.0, 0.5).unwrap();
        let w = brute_pv(&p, 0.0, 0.5);
        prop_assert!((v - w).norm() < 1e-6, "{v} vs {w}");
    }

    #[test]
    fn pv_conjugation_symmetry(c in prop::collection::vec(-1e4f64..1e4, 1..=5), a in 0.0f64..0.2, b in 0.25f64..0.5) {
        let p = PolyPhase { coeffs: c.clone() };
        let q = PolyPhase { coeffs: c.iter().map(|x| -x).collect() };
        let v = pv_osc_1d(&p, a, b).unwrap();
        let w = pv_osc_1d(&q, a, b).unwrap();
        prop_assert!((v - w.conj()).norm() < 1e-10, "{v} vs {w}");
    }
}

#[test]
fn fefferman_growth() {
    let lams = [1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6];
    let vals: Vec<f64> = lams.iter().map(|&l| fefferman_sine(l)).collect();
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
    let diff = fefferman_sine(1e6) - fefferman_sine(1e5);
    let want = PI / 2.0 * 10f64.ln();
    assert!((diff - want).abs() < 0.03 * want, "{diff}");
}

#[test]
fn sw_degenerate_degrees() {
    for t in sw_values(0, 5, 0, 200).unwrap() {
        assert_eq!(t.value, 0.0);
    }
    let bound = 2.0 * si(PI) + 1e-3;
    for t in sw_values(1, 5, 0, 2000).unwrap() {
        assert!(t.value <= bound, "{t:?}");
    }
    assert!(sw_values(6, 5, 0, 1).is_err());
    assert!(sw_sample(3, 0, 5).is_err());
}

#[test]
fn sw_is_deterministic_and_prefix_consistent() {
    let full = sw_values(3, 7, 0, 300).unwrap();
    let tail = sw_values(3, 7, 150, 300).unwrap();
    assert_eq!(&full[150..], &tail[..]);
    for t in &full {
        let (c, a, b) = sw_draw(3, 7, t.index);
        assert_eq!((c, a, b), (t.coeffs.clone(), t.a, t.b));
        assert!(0.0 <= t.a && t.a < t.b && t.b < 0.5);
    }
    let best = sw_sample(3, 300, 7).unwrap();
    let max = full.iter().map(|t| t.value).fold(0.0, f64::max);
    assert_eq!(best.value, max);
    assert_eq!(best.index, full.iter().position(|t| t.value == max).unwrap() as u64);
    assert_ne!(sw_values(3, 8, 0, 5).unwrap(), full[..5]);
}

#[test]
fn sequential_and_parallel_agree() {
    par::set_sequential(true);
    let a = sw_values(4, 1, 0, 64).unwrap();
    let fa = build_character(&corpus::vector_product_family(), Multiplier::Vector(vec![5, 3]), GridChoice::default()).unwrap();
    par::set_sequential(false);
    let b = sw_values(4, 1, 0, 64).unwrap();
    let fb = build_character(&corpus::vector_product_family(), Multiplier::Vector(vec![5, 3]), GridChoice::default()).unwrap();
    assert_eq!(a, b);
    for (k, l) in [(0, 0), (3, -4), (-10, 7)] {
        assert_eq!(fa.coeff(k, l), fb.coeff(k, l));
    }
}
