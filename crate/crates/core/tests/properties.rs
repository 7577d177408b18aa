use nalgebra::DMatrix;
use proptest::prelude::*;

use qcmod::seqnorm::phi_norm;
use qcmod::{CantorComplex, FiniteModel, GaugeSpec, WeightSequence, Word};

fn gauge_strategy() -> impl Strategy<Value = GaugeSpec> {
    prop_oneof![
        (1.0f64..3.0).prop_map(|s| GaugeSpec::power(s).unwrap()),
        Just(GaugeSpec::Example37),
        (1.0f64..2.5, 0.0f64..2.0).prop_map(|(s, b)| GaugeSpec::power_log(s, b).unwrap()),
    ]
}

// gauges whose complex is feasible in the plane
fn planar_strategy() -> impl Strategy<Value = GaugeSpec> {
    prop_oneof![
        (1.0f64..1.9).prop_map(|s| GaugeSpec::power(s).unwrap()),
        Just(GaugeSpec::Example37),
        (1.0f64..1.6, 0.0f64..1.0).prop_map(|(s, b)| GaugeSpec::power_log(s, b).unwrap()),
    ]
}

fn weights_strategy(len: usize) -> impl Strategy<Value = WeightSequence> {
    prop::collection::vec(0.0f64..1.0, len).prop_map(|mut v| {
        v.sort_by(|a, b| b.total_cmp(a));
        v[0] += 0.1;
        WeightSequence::custom(v).unwrap()
    })
}

fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_round_trip(g in gauge_strategy(), e in -14.0f64..0.0) {
        let y = 10f64.powf(e).min(g.y_max());
        let x = g.inverse(y).unwrap();
        let back = g.eval(x).unwrap();
        prop_assert!((back - y).abs() <= 1e-13 * y);
    }

    #[test]
    fn derivatives_match_differences(g in gauge_strategy(), e in -6.0f64..-0.5) {
        let x = 10f64.powf(e);
        let (d1, d2) = g.derivatives(x).unwrap();
        let h = 1e-4 * x;
        let f = |t: f64| g.eval(t).unwrap();
        let fd1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let fd2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        prop_assert!((d1 - fd1).abs() <= 1e-6 * d1.abs());
        prop_assert!((d2 - fd2).abs() <= 1e-3 * d2.abs().max(1e-300));
    }

    #[test]
    fn hprime_matches_difference(g in gauge_strategy(), e in 0.5f64..6.0) {
        let k = 10f64.powf(e);
        let (_, d) = g.h_and_hprime(k).unwrap();
        let h = |x: f64| g.h_and_hprime(x).unwrap().0;
        let step = 1e-4 * k;
        let fd = (h(k + step) - h(k - step)) / (2.0 * step);
        prop_assert!((d - fd).abs() <= 1e-6 * d);
    }

    #[test]
    fn phi_norm_is_symmetric_gauge(
        xs in prop::collection::vec(-5.0f64..5.0, 1..24),
        pi in weights_strategy(24),
        c in -3.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let base = phi_norm(&pi, &xs).unwrap();
        prop_assert!(base >= 0.0);
        let mut perm = xs.clone();
        let k = perm.len();
        perm.rotate_left((seed as usize) % k);
        perm.iter_mut().step_by(2).for_each(|x| *x = -*x);
        prop_assert!((phi_norm(&pi, &perm).unwrap() - base).abs() <= 1e-12 * (1.0 + base));
        let scaled: Vec<f64> = xs.iter().map(|x| c * x).collect();
        prop_assert!((phi_norm(&pi, &scaled).unwrap() - c.abs() * base).abs() <= 1e-12 * (1.0 + base));
        let top = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(base >= pi.values()[0] * top - 1e-12);
    }

    #[test]
    fn phi_norm_triangle_on_matrices(
        a in prop::collection::vec(-1.0f64..1.0, 25),
        b in prop::collection::vec(-1.0f64..1.0, 25),
        pi in weights_strategy(5),
    ) {
        let ma = DMatrix::from_vec(5, 5, a);
        let mb = DMatrix::from_vec(5, 5, b);
        let sum = &ma + &mb;
        let na = phi_norm(&pi, &singular_values(&ma)).unwrap();
        let nb = phi_norm(&pi, &singular_values(&mb)).unwrap();
        let ns = phi_norm(&pi, &singular_values(&sum)).unwrap();
        prop_assert!(ns <= na + nb + 1e-10);
    }

    #[test]
    fn children_partition_parent(g in planar_strategy(), letters in prop::collection::vec(1u32..=4, 0..4)) {
        let c = CantorComplex::build(g, 5, Some(2));
        prop_assume!(c.is_ok());
        let c = c.unwrap();
        let parent = Word::new(2, letters).unwrap();
        let pg = c.cell_geometry(&parent).unwrap();
        let kids: Vec<Word> = (1..=4).map(|l| parent.child(l).unwrap()).collect();
        let total: f64 = kids.iter().map(|k| c.cell_measure(k)).sum();
        prop_assert!((total - c.cell_measure(&parent)).abs() <= 1e-15);
        for k in &kids {
            let kg = c.cell_geometry(k).unwrap();
            for axis in 0..2 {
                prop_assert!(kg.corner[axis] >= pg.corner[axis]);
                prop_assert!(kg.corner[axis] + kg.side <= pg.corner[axis] + pg.side + 1e-15);
            }
        }
        for (i, a) in kids.iter().enumerate() {
            for b in &kids[i + 1..] {
                let ga = c.cell_geometry(a).unwrap();
                let gb = c.cell_geometry(b).unwrap();
                let separated = (0..2).any(|axis| {
                    ga.corner[axis] + ga.side < gb.corner[axis]
                        || gb.corner[axis] + gb.side < ga.corner[axis]
                });
                prop_assert!(separated);
            }
        }
    }

    #[test]
    fn analytic_matches_oracle(g in planar_strategy(), depth in 1usize..=3, level_seed in 0usize..3) {
        let c = CantorComplex::build(g, 3, Some(2));
        prop_assume!(c.is_ok());
        let c = c.unwrap();
        let m = FiniteModel::build(&c, depth).unwrap();
        let level = level_seed % (depth + 1);
        for axis in 0..2 {
            let a = m.commutator_spectrum_analytic(level, axis).unwrap();
            let b = m.commutator_spectrum_bruteforce(level, axis).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!((x - y).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn spectrum_bounds(g in planar_strategy(), level in 1usize..4) {
        let c = CantorComplex::build(g, 5, Some(2));
        prop_assume!(c.is_ok());
        let c = c.unwrap();
        let m = FiniteModel::build(&c, 5).unwrap();
        for s in m.commutator_spectra(level).unwrap() {
            prop_assert!(s.len() <= 2 * (1 << (2 * level)));
            prop_assert!(s.max() <= 0.5 * c.lambda(level) + 1e-15);
        }
    }

    #[test]
    fn shift_gap_nonnegative(pi in weights_strategy(40), t in 0usize..8) {
        let c = CantorComplex::build(GaugeSpec::power(1.5).unwrap(), 3, None).unwrap();
        let m = FiniteModel::build(&c, 3).unwrap();
        let s = m.commutator_spectrum_analytic(1, 0).unwrap();
        let shifted = pi.shift(t).unwrap();
        let a = s.phi_norm(&pi).unwrap();
        let b = s.phi_norm(&shifted).unwrap();
        prop_assert!(b <= a + 1e-15);
        prop_assert!(a - b <= t as f64 * pi.values()[0] * s.max() + 1e-15);
    }
}

#[test]
fn geometry_json_round_trip() {
    let c = CantorComplex::build(GaugeSpec::Example37, 3, None).unwrap();
    let doc = c.export_geometry(2).unwrap();
    let text = doc.to_json().unwrap();
    let back = qcmod::fractal::GeometryDocument::from_json(&text).unwrap();
    assert_eq!(back, doc);
    assert_eq!(back.records.len(), 16);
}

#[test]
fn restricted_model_blocks_are_congruent() {
    let c = CantorComplex::build(GaugeSpec::power(1.5).unwrap(), 6, None).unwrap();
    let pi = WeightSequence::harmonic(4096).unwrap();
    let norms: Vec<u64> = c
        .enumerate_words(2)
        .unwrap()
        .iter()
        .map(|w| {
            let m = FiniteModel::from_words(&c, 5, std::slice::from_ref(w)).unwrap();
            m.commutator_norms(4, &pi).unwrap().tuple_norm.to_bits()
        })
        .collect();
    assert!(norms.iter().all(|b| *b == norms[0]));
}
