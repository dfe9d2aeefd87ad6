use num_complex::Complex64 as C;
use proptest::prelude::*;
use rarita::cli::classify;
use rarita::cli::Growth;
use rarita::evolver::spinor::{div3, dvec, grad_sym3, Sym2};
use rarita::evolver::{
    apply_gauge, characteristic_speeds, principal_symbol, GaugeField, GaugeVariant, InitMode, Lab, SimConfig, SpatialBasis,
    SymbolParams,
};
use rarita::ir::{canonicalize, jet_eval, parse, Expression, JetAssignment};

fn c() -> impl Strategy<Value = C> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C::new(a, b))
}

fn direction() -> impl Strategy<Value = [f64; 3]> {
    [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64].prop_filter("nonzero", |k| k.iter().map(|x| x * x).sum::<f64>() > 1e-4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn symbol_is_homogeneous_of_degree_one(k in direction(), s in 0.1..5.0f64) {
        let b = SpatialBasis::default();
        let p = SymbolParams::default();
        let m1 = principal_symbol(&b, k, p);
        let m2 = principal_symbol(&b, k.map(|x| x * s), p);
        prop_assert!((m2 - m1 * C::new(s, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn speeds_do_not_depend_on_direction(k in direction()) {
        let b = SpatialBasis::default();
        let s = characteristic_speeds(&b, k, SymbolParams::default()).unwrap();
        let z = characteristic_speeds(&b, [0.0, 0.0, 1.0], SymbolParams::default()).unwrap();
        for (a, b) in s.iter().zip(&z) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_of_symmetrized_gradient(d00 in c(), d01 in c(), d11 in c(), v0 in c(), v1 in c()) {
        let d: Sym2 = [[d00, d01], [d01, d11]];
        let v = [v0, v1];
        let a = div3(&d, &grad_sym3(&d, &v));
        let b = dvec(&d, &dvec(&d, &v));
        for k in 0..2 {
            prop_assert!((a[k] + b[k] * (4.0 / 3.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rhs_is_linear(seed in 0u64..1000, alpha in c()) {
        let lab = Lab::new(SimConfig { n: 16, modes: 3, mass: 0.8, init: InitMode::RandomModes, seed, ..SimConfig::default() }).unwrap();
        let a = lab.initial_state().unwrap();
        let lab2 = Lab::new(SimConfig { seed: seed + 1, ..lab.cfg.clone() }).unwrap();
        let b = lab2.initial_state().unwrap();
        let mix = |x: &Vec<Vec<C>>, y: &Vec<Vec<C>>| -> Vec<Vec<C>> {
            x.iter().zip(y).map(|(p, q)| p.iter().zip(q).map(|(u, v)| u * alpha + v).collect()).collect()
        };
        let lhs = lab.rhs(&mix(&a.u, &b.u), &mix(&a.bg, &b.bg), None);
        let rhs = mix(&lab.rhs(&a.u, &a.bg, None), &lab.rhs(&b.u, &b.bg, None));
        let err = lhs.iter().flatten().zip(rhs.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10);
    }

    #[test]
    fn gauge_shift_preserves_constraints(seed in 0u64..1000, gseed in 0u64..1000) {
        let lab = Lab::new(SimConfig { n: 32, init: InitMode::RandomModes, seed, ..SimConfig::default() }).unwrap();
        let mut s = lab.initial_state().unwrap();
        let (t0, s0) = lab.constraints(&s);
        apply_gauge(&lab, &mut s, &GaugeField::random(&lab, gseed), GaugeVariant::Derived).unwrap();
        let (t1, s1) = lab.constraints(&s);
        for (a, b) in t0.iter().chain(&s0).zip(t1.iter().chain(&s1)) {
            prop_assert!((a[0] - b[0]).norm() < 1e-11 && (a[1] - b[1]).norm() < 1e-11);
        }
    }

    #[test]
    fn decay_is_never_growth(initial in 1e-12..1e3f64, factor in 0.0..1.0f64) {
        prop_assert_eq!(classify(initial, initial * factor, 100.0, 1e-8), Growth::Flat);
    }

    #[test]
    fn canonical_form_has_the_same_jet_values(coeffs in proptest::collection::vec(-3i32..4, 6), seed in 0u64..50) {
        let pool = [
            "nabla_{A A'} nabla_{B B'} tau_{C}",
            "nabla_{B B'} nabla_{A A'} tau_{C}",
            "eps_{A B} boxP_{A' B'} tau_{C}",
            "eps_{A' B'} boxU_{A B} tau_{C}",
            "eps_{A C} nabla_{B A'} nabla^{D}_{B'} tau_{D}",
            "Phi_{A B A' B'} tau_{C}",
        ];
        let e = pool.iter().zip(&coeffs).fold(Expression::zero(), |acc, (m, k)| {
            acc.add(&parse(&format!("{k} {m}")).unwrap())
        });
        let canon = canonicalize(&e);
        let a = jet_eval(&e, &mut JetAssignment::random(seed)).unwrap();
        let b = jet_eval(&canon, &mut JetAssignment::random(seed)).unwrap();
        prop_assert_eq!(&a.free, &b.free);
        prop_assert!(a.max_diff(&b) < 1e-10);
    }
}
